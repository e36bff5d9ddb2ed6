//! Numerical localizable-entanglement search: projective measurements on
//! every interior qubit of a chain, concurrence of the resulting two-qubit
//! state, and a seeded-restart Nelder-Mead maximization over the
//! measurement angles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::densesim::{
    apply_measurement, wc_state, Ensemble, MeasurementSpec, QubitAction, TwoQubitState,
};
use crate::entanglement::concurrence;
use crate::error::{Error, Result};

/// One (theta, phi) pair per measured qubit, chain order.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleVector {
    angles: Vec<(f64, f64)>,
}

impl AngleVector {
    pub fn new(angles: Vec<(f64, f64)>) -> Self {
        AngleVector { angles }
    }

    /// All-equatorial angles (theta = pi/2) with the given phases.
    pub fn equatorial(phis: &[f64]) -> Self {
        AngleVector {
            angles: phis.iter().map(|&phi| (FRAC_PI_2, phi)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angles(&self) -> &[(f64, f64)] {
        &self.angles
    }

    /// Root-mean-square deviation of the polar angles from pi/2, after
    /// folding out the theta -> pi - theta reflection.
    pub fn theta_rms_deviation_from_equator(&self) -> f64 {
        if self.angles.is_empty() {
            return 0.0;
        }
        let sum: f64 = self
            .angles
            .iter()
            .map(|&(theta, _)| (theta - FRAC_PI_2).powi(2))
            .sum();
        (sum / self.angles.len() as f64).sqrt()
    }

    fn from_flat(flat: &[f64]) -> Self {
        AngleVector {
            angles: flat.chunks_exact(2).map(|c| (c[0], c[1])).collect(),
        }
    }

    /// Wrap into canonical ranges theta in [0, pi], phi in [0, 2 pi).
    fn canonicalized(&self) -> Self {
        let angles = self
            .angles
            .iter()
            .map(|&(theta, phi)| {
                let mut t = theta.rem_euclid(TAU);
                let mut p = phi;
                if t > PI {
                    t = TAU - t;
                    p += PI;
                }
                (t, p.rem_euclid(TAU))
            })
            .collect();
        AngleVector { angles }
    }
}

/// Search configuration. The defaults are tuned for the ten-dimensional
/// periodic landscapes of seven-qubit chains.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    /// Initial simplex displacement (radians).
    pub simplex_init_step: f64,
    pub f_tolerance: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 20,
            max_iterations: 2000,
            simplex_init_step: 0.3,
            f_tolerance: 1e-9,
            seed: 0,
        }
    }
}

/// Whether the objective is the single post-selected branch or the
/// probability-weighted average over all outcome branches (fixed,
/// non-adaptive bases).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LeMode {
    Postselected,
    OutcomeAveraged,
}

impl std::fmt::Display for LeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LeMode::Postselected => write!(f, "postselected"),
            LeMode::OutcomeAveraged => write!(f, "outcome_averaged"),
        }
    }
}

fn measurement_spec(n: usize, angles: &AngleVector, outcomes: &[u8]) -> Result<MeasurementSpec> {
    if angles.len() != n - 2 || outcomes.len() != n - 2 {
        return Err(Error::Domain(format!(
            "expected {} angle pairs and outcomes for n={n}",
            n - 2
        )));
    }
    let mut spec = MeasurementSpec::keep_all(n);
    for (i, (&(theta, phi), &bit)) in angles.angles().iter().zip(outcomes).enumerate() {
        spec = spec.set(
            i + 1,
            QubitAction::Project {
                theta,
                phi,
                outcome_bit: bit,
            },
        );
    }
    Ok(spec)
}

/// Measure qubits 1..n-2 at the given angles and outcomes; returns the
/// outcome probability and the post-selected state of the chain ends.
pub fn localized_state(
    rho: &Ensemble,
    angles: &AngleVector,
    outcomes: &[u8],
) -> Result<(f64, TwoQubitState)> {
    let spec = measurement_spec(rho.n_qubits(), angles, outcomes)?;
    let (probability, post) = apply_measurement(rho, &spec)?;
    Ok((probability, TwoQubitState::from_ensemble(&post)?))
}

/// Entanglement objective at fixed angles.
pub fn le_objective(rho: &Ensemble, angles: &AngleVector, mode: LeMode) -> Result<f64> {
    let measured = rho.n_qubits() - 2;
    match mode {
        LeMode::Postselected => {
            let (_, state) = localized_state(rho, angles, &vec![0; measured])?;
            concurrence(&state)
        }
        LeMode::OutcomeAveraged => {
            let mut total = 0.0;
            for bits in 0..1usize << measured {
                let outcomes: Vec<u8> = (0..measured).map(|i| (bits >> i & 1) as u8).collect();
                match localized_state(rho, angles, &outcomes) {
                    Ok((p, state)) => total += p * concurrence(&state)?,
                    Err(Error::ImpossibleOutcome(_)) => {}
                    Err(e) => return Err(e),
                }
            }
            Ok(total)
        }
    }
}

/// Search result.
#[derive(Debug, Clone, Serialize)]
pub struct LeSearchResult {
    #[serde(skip)]
    pub best_angles: AngleVector,
    pub best_value: f64,
    /// True when the best restart met the simplex tolerance within the
    /// iteration budget.
    pub converged: bool,
    pub iterations: usize,
    pub best_restart: usize,
}

/// Maximize the localized entanglement over measurement angles with
/// Nelder-Mead restarts from seeded uniform angles.
///
/// The search runs on the unclamped spin-flip difference, which agrees
/// with the concurrence wherever it is positive but keeps sloping across
/// the separable region; on states barely above the separability threshold
/// the concurrence itself is zero on most of the angle space and uniform
/// restarts would otherwise never leave the plateau. The reported
/// `best_value` is the true (clamped) objective at the best angles.
///
/// Deterministic for a fixed seed; ties between restarts resolve to the
/// lowest restart index. Non-convergence is reported as a flag on the
/// best-so-far result, never as an error.
pub fn maximize_le(rho: &Ensemble, cfg: &OptimizerConfig, mode: LeMode) -> Result<LeSearchResult> {
    if rho.n_qubits() < 3 {
        return Err(Error::Domain("need at least one measured qubit".into()));
    }
    if cfg.restarts < 1 || cfg.f_tolerance <= 0.0 {
        return Err(Error::Domain(
            "restarts >= 1 and f_tolerance > 0 required".into(),
        ));
    }
    let measured = rho.n_qubits() - 2;
    let dim = 2 * measured;
    let objective = |flat: &[f64]| -> f64 {
        let angles = AngleVector::from_flat(flat);
        // Zero-probability outcomes rank below every reachable value.
        match search_objective(rho, &angles, mode) {
            Ok(v) => -v,
            Err(_) => 3.0,
        }
    };
    let mut best: Option<(f64, Vec<f64>, bool, usize, usize)> = None;
    for restart in 0..cfg.restarts {
        // Spread base seeds far apart so adjacent seeds do not share
        // restart streams.
        let stream = cfg
            .seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(restart as u64);
        let mut rng = ChaCha12Rng::seed_from_u64(stream);
        let start: Vec<f64> = (0..dim)
            .map(|i| {
                if i % 2 == 0 {
                    rng.random::<f64>() * PI
                } else {
                    rng.random::<f64>() * TAU
                }
            })
            .collect();
        let run = nelder_mead(
            &objective,
            &start,
            cfg.simplex_init_step,
            cfg.max_iterations,
            cfg.f_tolerance,
        );
        let better = match &best {
            None => true,
            Some((value, ..)) => run.value < *value - 1e-15,
        };
        if better {
            best = Some((run.value, run.point, run.converged, run.iterations, restart));
        }
    }
    let (_, point, converged, iterations, best_restart) = best.expect("restarts >= 1");
    let best_angles = AngleVector::from_flat(&point).canonicalized();
    let best_value = le_objective(rho, &best_angles, mode)?;
    Ok(LeSearchResult {
        best_angles,
        best_value,
        converged,
        iterations,
        best_restart,
    })
}

/// The search surrogate: unclamped where the true objective would clamp.
fn search_objective(rho: &Ensemble, angles: &AngleVector, mode: LeMode) -> Result<f64> {
    let measured = rho.n_qubits() - 2;
    match mode {
        LeMode::Postselected => {
            let (_, state) = localized_state(rho, angles, &vec![0; measured])?;
            crate::entanglement::spin_flip_difference(&state)
        }
        LeMode::OutcomeAveraged => {
            let mut total = 0.0;
            for bits in 0..1usize << measured {
                let outcomes: Vec<u8> = (0..measured).map(|i| (bits >> i & 1) as u8).collect();
                match localized_state(rho, angles, &outcomes) {
                    Ok((p, state)) => {
                        total += p * crate::entanglement::spin_flip_difference(&state)?
                    }
                    Err(Error::ImpossibleOutcome(_)) => {}
                    Err(e) => return Err(e),
                }
            }
            Ok(total)
        }
    }
}

struct NmRun {
    point: Vec<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
}

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2) on an unconstrained flat parameter vector.
fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    start: &[f64],
    init_step: f64,
    max_iterations: usize,
    f_tolerance: f64,
) -> NmRun {
    let dim = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((start.to_vec(), f(start)));
    for i in 0..dim {
        let mut p = start.to_vec();
        p[i] += init_step;
        let v = f(&p);
        simplex.push((p, v));
    }
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        iterations += 1;
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        if (simplex[dim].1 - simplex[0].1).abs() < f_tolerance {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|i| simplex[..dim].iter().map(|(p, _)| p[i]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let reflect: Vec<f64> = (0..dim).map(|i| 2.0 * centroid[i] - worst.0[i]).collect();
        let f_reflect = f(&reflect);
        if f_reflect < simplex[0].1 {
            let expand: Vec<f64> = (0..dim)
                .map(|i| 3.0 * centroid[i] - 2.0 * worst.0[i])
                .collect();
            let f_expand = f(&expand);
            simplex[dim] = if f_expand < f_reflect {
                (expand, f_expand)
            } else {
                (reflect, f_reflect)
            };
            continue;
        }
        if f_reflect < simplex[dim - 1].1 {
            simplex[dim] = (reflect, f_reflect);
            continue;
        }
        let contract: Vec<f64> = if f_reflect < worst.1 {
            (0..dim)
                .map(|i| 1.5 * centroid[i] - 0.5 * worst.0[i])
                .collect()
        } else {
            (0..dim)
                .map(|i| 0.5 * centroid[i] + 0.5 * worst.0[i])
                .collect()
        };
        let f_contract = f(&contract);
        if f_contract < worst.1.min(f_reflect) {
            simplex[dim] = (contract, f_contract);
            continue;
        }
        // Shrink toward the best vertex.
        let best = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            for (x, b) in entry.0.iter_mut().zip(&best) {
                *x = 0.5 * (*x + b);
            }
            entry.1 = f(&entry.0);
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    NmRun {
        point: simplex[0].0.clone(),
        value: simplex[0].1,
        iterations,
        converged,
    }
}

/// Concurrence localized on the worst-case state by an equatorial sequence
/// with the given phases and outcomes. Never exceeds max{0, 2 lambda - 1}
/// beyond numerical tolerance.
pub fn equatorial_check(lambda: f64, n: usize, phis: &[f64], outcomes: &[u8]) -> Result<f64> {
    let rho = wc_state(n, lambda)?;
    let (_, state) = localized_state(&rho, &AngleVector::equatorial(phis), outcomes)?;
    concurrence(&state)
}

/// One grid point of the closed-form comparison for the four-qubit worst
/// case under X-Z plane measurements.
#[derive(Debug, Clone, Serialize)]
pub struct Wc4GridRow {
    pub lambda: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub dense: f64,
    pub closed_form: f64,
    pub deviation: f64,
}

/// Dense-simulated vs closed-form concurrence on a (lambda, theta2, theta3)
/// grid; returns the rows and the maximum absolute deviation.
pub fn wc4_grid_compare(
    lambdas: &[f64],
    theta2s: &[f64],
    theta3s: &[f64],
) -> Result<(Vec<Wc4GridRow>, f64)> {
    if lambdas.is_empty() || theta2s.is_empty() || theta3s.is_empty() {
        return Err(Error::Domain("grids must be nonempty".into()));
    }
    let mut rows = Vec::with_capacity(lambdas.len() * theta2s.len() * theta3s.len());
    let mut max_dev = 0.0f64;
    for &lambda in lambdas {
        let rho = wc_state(4, lambda)?;
        for &theta2 in theta2s {
            for &theta3 in theta3s {
                let angles = AngleVector::new(vec![(theta2, 0.0), (theta3, 0.0)]);
                let (_, state) = localized_state(&rho, &angles, &[0, 0])?;
                let dense = concurrence(&state)?;
                let closed_form =
                    crate::entanglement::x_state_concurrence_wc4(lambda, theta2, theta3);
                let deviation = (dense - closed_form).abs();
                max_dev = max_dev.max(deviation);
                rows.push(Wc4GridRow {
                    lambda,
                    theta2,
                    theta3,
                    dense,
                    closed_form,
                    deviation,
                });
            }
        }
    }
    Ok((rows, max_dev))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densesim::cluster_state;
    use rand::{Rng, SeedableRng};

    #[test]
    fn equatorial_measurements_on_cluster_localize_a_bell_pair() {
        for n in 3..=7usize {
            let rho = Ensemble::pure(cluster_state(n).unwrap());
            let angles = AngleVector::equatorial(&vec![0.0; n - 2]);
            let (p, state) = localized_state(&rho, &angles, &vec![0; n - 2]).unwrap();
            assert!(p > 0.0);
            assert!((concurrence(&state).unwrap() - 1.0).abs() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn wc7_equatorial_concurrence_is_2_lambda_minus_1() {
        let lambda = 0.9;
        let phis = [0.3, 1.2, 2.2, 4.0, 0.7];
        let value = equatorial_check(lambda, 7, &phis, &[0; 5]).unwrap();
        assert!((value - 0.8).abs() < 1e-9);
    }

    #[test]
    fn equatorial_ceiling_holds_for_random_sequences() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(17);
        for &lambda in &[0.5, 0.7, 0.9] {
            for n in [4usize, 5, 6] {
                for _ in 0..10 {
                    let phis: Vec<f64> = (0..n - 2).map(|_| rng.random::<f64>() * TAU).collect();
                    let outcomes: Vec<u8> = (0..n - 2).map(|_| rng.random_range(0..2u8)).collect();
                    let value = equatorial_check(lambda, n, &phis, &outcomes).unwrap();
                    let ceiling = (2.0 * lambda - 1.0).max(0.0);
                    assert!(value <= ceiling + 1e-9, "lambda={lambda} n={n}");
                }
            }
        }
    }

    #[test]
    fn equatorial_value_is_phase_invariant() {
        let lambda = 0.8;
        let base = equatorial_check(lambda, 5, &[0.0, 0.0, 0.0], &[0; 3]).unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(23);
        for _ in 0..10 {
            let phis: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * TAU).collect();
            let v = equatorial_check(lambda, 5, &phis, &[0; 3]).unwrap();
            assert!((v - base).abs() < 1e-9);
        }
    }

    #[test]
    fn postselected_and_averaged_agree_at_the_equator_on_wc() {
        for n in [4usize, 5] {
            let rho = wc_state(n, 0.85).unwrap();
            let angles = AngleVector::equatorial(&vec![0.4; n - 2]);
            let post = le_objective(&rho, &angles, LeMode::Postselected).unwrap();
            let avg = le_objective(&rho, &angles, LeMode::OutcomeAveraged).unwrap();
            assert!((post - avg).abs() < 1e-4, "n={n}: {post} vs {avg}");
        }
    }

    #[test]
    fn maximize_le_on_small_cluster_reaches_one() {
        let rho = Ensemble::pure(cluster_state(4).unwrap());
        let cfg = OptimizerConfig {
            restarts: 8,
            seed: 5,
            ..OptimizerConfig::default()
        };
        let result = maximize_le(&rho, &cfg, LeMode::Postselected).unwrap();
        assert!(result.best_value > 1.0 - 1e-6);
    }

    #[test]
    fn maximize_le_on_wc4_matches_closed_form_maximum() {
        let rho = wc_state(4, 0.8).unwrap();
        let cfg = OptimizerConfig {
            restarts: 10,
            seed: 11,
            ..OptimizerConfig::default()
        };
        let result = maximize_le(&rho, &cfg, LeMode::Postselected).unwrap();
        assert!(
            (result.best_value - 0.6).abs() < 1e-5,
            "{}",
            result.best_value
        );
        assert!(result.best_angles.theta_rms_deviation_from_equator() < 1e-3);
    }

    #[test]
    fn maximize_le_at_degenerate_mixing_endpoints() {
        // At lambda = 1/2 the objective vanishes identically; at lambda = 1
        // the pure cluster reaches concurrence 1 on a whole manifold of
        // angle combinations, not only the equatorial one. Only the values
        // are pinned at these endpoints.
        let cfg = OptimizerConfig {
            restarts: 6,
            seed: 8,
            ..OptimizerConfig::default()
        };
        for (lambda, target) in [(0.5, 0.0), (1.0, 1.0)] {
            let rho = wc_state(7, lambda).unwrap();
            let result = maximize_le(&rho, &cfg, LeMode::Postselected).unwrap();
            assert!(
                (result.best_value - target).abs() < 1e-4,
                "lambda={lambda}: {}",
                result.best_value
            );
        }
    }

    #[test]
    fn restart_determinism() {
        let rho = wc_state(4, 0.75).unwrap();
        let cfg = OptimizerConfig {
            restarts: 6,
            seed: 99,
            ..OptimizerConfig::default()
        };
        let a = maximize_le(&rho, &cfg, LeMode::Postselected).unwrap();
        let b = maximize_le(&rho, &cfg, LeMode::Postselected).unwrap();
        assert_eq!(a.best_value.to_bits(), b.best_value.to_bits());
        assert_eq!(a.best_angles, b.best_angles);
        assert_eq!(a.best_restart, b.best_restart);
    }

    #[test]
    fn wc4_grid_columns_match_closed_form() {
        let lambdas = [0.8];
        let theta2s = [FRAC_PI_2, 1.0];
        let theta3s = [FRAC_PI_2, std::f64::consts::FRAC_PI_6];
        let (rows, max_dev) = wc4_grid_compare(&lambdas, &theta2s, &theta3s).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(max_dev < 1e-8, "max deviation {max_dev}");
        let equator = rows
            .iter()
            .find(|r| r.theta2 == FRAC_PI_2 && r.theta3 == FRAC_PI_2)
            .unwrap();
        assert!((equator.dense - 0.6).abs() < 1e-8);
        let half = rows
            .iter()
            .find(|r| r.theta2 == FRAC_PI_2 && r.theta3 == std::f64::consts::FRAC_PI_6)
            .unwrap();
        assert!((half.dense - 0.25).abs() < 1e-8);
    }

    #[test]
    fn y_chain_on_cluster_gives_unit_triplet() {
        // A chain of Y measurements with +1 outcomes leaves the ends in a
        // state whose three stabilizer correlators all have magnitude one.
        use crate::pauli::{surviving_triplet, MeasBasis, PauliString};
        let n = 5;
        let rho = Ensemble::pure(cluster_state(n).unwrap());
        let y_angles = AngleVector::new(vec![(FRAC_PI_2, FRAC_PI_2); n - 2]);
        let (_, state) = localized_state(&rho, &y_angles, &vec![0; n - 2]).unwrap();
        assert!((concurrence(&state).unwrap() - 1.0).abs() < 1e-10);
        // End components of the surviving triplet evaluate to +-1 on the
        // localized pair; sign absorption yields t = (1, 1, 1).
        let triplet = surviving_triplet(n, &vec![MeasBasis::Y; n - 2]).unwrap();
        let mut raw = [0.0; 3];
        for (slot, element) in triplet.iter().enumerate() {
            let ends = PauliString::from_letters(&[
                element.operator.letter(0),
                element.operator.letter(n - 1),
            ]);
            let dense = crate::testutil::dense_pauli(&ends);
            let mut acc = num_complex::Complex64::default();
            for r in 0..4 {
                for c in 0..4 {
                    acc += dense[(r, c)] * state.matrix()[(c, r)];
                }
            }
            assert!(acc.im.abs() < 1e-12);
            raw[slot] = acc.re;
        }
        let t = crate::entanglement::TripletValues::from_raw(raw).unwrap();
        for v in t.values() {
            assert!((v - 1.0).abs() < 1e-10, "triplet {raw:?}");
        }
    }

    #[test]
    fn y_chain_maximally_entangled_for_every_outcome() {
        // Y measurements on a perfect cluster localize a maximally
        // entangled pair whichever outcomes occur.
        let n = 5;
        let rho = Ensemble::pure(cluster_state(n).unwrap());
        let y_angles = AngleVector::new(vec![(FRAC_PI_2, FRAC_PI_2); n - 2]);
        for bits in 0..1u8 << (n - 2) {
            let outcomes: Vec<u8> = (0..n - 2).map(|i| bits >> i & 1).collect();
            let (p, state) = localized_state(&rho, &y_angles, &outcomes).unwrap();
            assert!(p > 0.0);
            assert!(
                (concurrence(&state).unwrap() - 1.0).abs() < 1e-10,
                "outcomes {outcomes:?}"
            );
        }
    }

    /// Transfer-matrix oracle for equatorial sequences: projecting the
    /// interior of a chain contracts to a product of 2x2 matrices
    /// M_j[a, b] = conj(c_j[b]) (-1)^{ab} (c_j the projector amplitudes),
    /// closed by M_n[a, b] = (-1)^{ab}; a Z error on qubit j inserts a Z
    /// into the product at slot j. Entirely independent of the statevector
    /// projection path.
    mod transfer_oracle {
        use num_complex::Complex64;

        type M2 = [[Complex64; 2]; 2];

        fn c(re: f64, im: f64) -> Complex64 {
            Complex64::new(re, im)
        }

        fn mul(a: &M2, b: &M2) -> M2 {
            let mut out = [[c(0.0, 0.0); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
                }
            }
            out
        }

        fn z() -> M2 {
            [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]]
        }

        fn measured_slot(phi: f64, s: u8) -> M2 {
            let amp = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, phi);
            let amp = if s == 0 { amp } else { -amp };
            let c0 = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            // [a][b]: bra coefficient of |b> times the neighbor-phase (-1)^{ab}
            [[c0.conj(), amp.conj()], [c0.conj(), -amp.conj()]]
        }

        fn closing_slot() -> M2 {
            [[c(1.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(-1.0, 0.0)]]
        }

        /// Unnormalized end-pair amplitudes after projecting qubits 1..n-2
        /// of an n-qubit cluster carrying a Z error at `z_at`.
        pub fn branch(
            n: usize,
            phis: &[f64],
            outcomes: &[u8],
            z_at: Option<usize>,
        ) -> [Complex64; 4] {
            let mut m = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
            if z_at == Some(0) {
                m = mul(&m, &z());
            }
            for (j, (&phi, &s)) in phis.iter().zip(outcomes).enumerate() {
                let mut slot = measured_slot(phi, s);
                if z_at == Some(j + 1) {
                    slot = mul(&slot, &z());
                }
                m = mul(&m, &slot);
            }
            let mut last = closing_slot();
            if z_at == Some(n - 1) {
                last = mul(&last, &z());
            }
            m = mul(&m, &last);
            [m[0][0], m[0][1], m[1][0], m[1][1]]
        }
    }

    #[test]
    fn equatorial_check_matches_transfer_matrix_oracle() {
        use nalgebra::Matrix4;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(77);
        for n in [4usize, 5, 7] {
            for lambda in [0.6, 0.85, 1.0] {
                for _ in 0..8 {
                    let phis: Vec<f64> = (0..n - 2).map(|_| rng.random::<f64>() * TAU).collect();
                    let outcomes: Vec<u8> = (0..n - 2).map(|_| rng.random_range(0..2u8)).collect();
                    // Mix the error-free branch with every single-qubit Z
                    // branch, weights as in the worst-case construction.
                    let mut rho = Matrix4::from_element(num_complex::Complex64::default());
                    let mut add = |amps: [num_complex::Complex64; 4], w: f64| {
                        for i in 0..4 {
                            for j in 0..4 {
                                rho[(i, j)] += amps[i] * amps[j].conj() * w;
                            }
                        }
                    };
                    add(transfer_oracle::branch(n, &phis, &outcomes, None), lambda);
                    for q in 0..n {
                        add(
                            transfer_oracle::branch(n, &phis, &outcomes, Some(q)),
                            (1.0 - lambda) / n as f64,
                        );
                    }
                    let trace = rho.trace().re;
                    let state =
                        crate::densesim::TwoQubitState::new(rho.scale(1.0 / trace)).unwrap();
                    let oracle_value = concurrence(&state).unwrap();
                    let dense_value = equatorial_check(lambda, n, &phis, &outcomes).unwrap();
                    assert!(
                        (oracle_value - dense_value).abs() < 1e-10,
                        "n={n} lambda={lambda}: oracle {oracle_value} vs dense {dense_value}"
                    );
                }
            }
        }
    }

    #[test]
    fn measured_wc4_bloch_components_match_closed_form() {
        use crate::entanglement::bloch_decompose;
        for lambda in [0.6, 0.8, 1.0] {
            for t2 in [0.4, 0.9, FRAC_PI_2, 2.3] {
                for t3 in [0.7, FRAC_PI_2, 1.7] {
                    let rho = wc_state(4, lambda).unwrap();
                    let angles = AngleVector::new(vec![(t2, 0.0), (t3, 0.0)]);
                    let (prob, state) = localized_state(&rho, &angles, &[0, 0]).unwrap();
                    assert!((prob - 0.25).abs() < 1e-12);
                    let b = bloch_decompose(&state);
                    let pref = (1.0 + lambda) / 2.0;
                    let r_expect = [pref * t2.cos(), 0.0, pref * t2.sin() * t3.cos()];
                    let s_expect = [pref * t3.cos(), 0.0, pref * t3.sin() * t2.cos()];
                    let t_expect = [
                        [lambda * t2.cos() * t3.cos(), 0.0, lambda * t3.sin()],
                        [0.0, (2.0 * lambda - 1.0) * t2.sin() * t3.sin(), 0.0],
                        [lambda * t2.sin(), 0.0, 0.0],
                    ];
                    for i in 0..3 {
                        assert!((b.r[i] - r_expect[i]).abs() < 1e-10);
                        assert!((b.s[i] - s_expect[i]).abs() < 1e-10);
                        for j in 0..3 {
                            assert!(
                                (b.t_matrix[i][j] - t_expect[i][j]).abs() < 1e-10,
                                "T[{i}][{j}] at lambda={lambda} t2={t2} t3={t3}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn nelder_mead_minimizes_a_quadratic() {
        let f = |x: &[f64]| (x[0] - 1.5).powi(2) + 3.0 * (x[1] + 0.5).powi(2);
        let run = nelder_mead(&f, &[5.0, 5.0], 0.5, 500, 1e-12);
        assert!(run.converged);
        assert!((run.point[0] - 1.5).abs() < 1e-5);
        assert!((run.point[1] + 0.5).abs() < 1e-5);
    }

    #[test]
    fn canonicalization_wraps_angles() {
        let v = AngleVector::new(vec![(PI + 0.2, 0.1), (-0.3, 7.0)]).canonicalized();
        for &(t, p) in v.angles() {
            assert!((0.0..=PI).contains(&t));
            assert!((0.0..TAU).contains(&p));
        }
    }
}
