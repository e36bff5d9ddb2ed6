//! Dense pure-state and ensemble simulation of small qubit registers:
//! cluster-state construction, worst-case mixtures, projective measurements,
//! segment clipping and Pauli expectation values. This is the brute-force
//! side of every algebraic claim in the crate.
//!
//! Density operators are never materialized as 4^n arrays: a mixed state is
//! a convex combination of pure branches, which keeps the worst-case state
//! (n+1 branches) cheap out to the dense limit.
//!
//! Qubit ordering is big-endian by chain position: qubit 0 occupies the most
//! significant bit of the amplitude index.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// Default cap on dense statevector size (qubits).
pub const DEFAULT_DENSE_LIMIT: usize = 14;

/// Branches with post-measurement weight below this are pruned (weights are
/// renormalized afterwards).
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// Conditioning events with probability below this are rejected as
/// impossible outcomes.
pub const IMPOSSIBLE_OUTCOME_THRESHOLD: f64 = 1e-12;

const NORM_TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Bit position of qubit `q` in an `n`-qubit amplitude index.
#[inline]
fn bit_of(n: usize, q: usize) -> usize {
    n - 1 - q
}

/// A normalized pure state on `n` qubits.
#[derive(Debug, Clone)]
pub struct PureState {
    n: usize,
    amps: Vec<Complex64>,
}

impl PureState {
    /// Wrap an amplitude vector; the squared norm must be 1 within 1e-10.
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::Domain(format!(
                "amplitude vector length {dim} is not a power of two"
            )));
        }
        let n = dim.trailing_zeros() as usize;
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "squared norm {norm_sq} deviates from 1 beyond {NORM_TOL:.0e}"
            )));
        }
        Ok(PureState { n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// <self|other>.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {} qubits",
                self.n, other.n
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Apply a Pauli operator, phase included.
    pub fn apply_pauli(&self, op: &PauliString) -> Result<PureState> {
        if op.n_qubits() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "operator on {} qubits applied to {}-qubit state",
                op.n_qubits(),
                self.n
            )));
        }
        let n = self.n;
        let mut flip_mask = 0usize;
        let mut sign_mask = 0usize;
        let mut y_count = 0u32;
        for q in 0..n {
            let bit = 1usize << bit_of(n, q);
            match op.letter(q) {
                crate::pauli::Pauli::I => {}
                crate::pauli::Pauli::X => flip_mask |= bit,
                crate::pauli::Pauli::Z => sign_mask |= bit,
                crate::pauli::Pauli::Y => {
                    flip_mask |= bit;
                    sign_mask |= bit;
                    y_count += 1;
                }
            }
        }
        // Y|b> = i(-1)^b |1-b>, so Y letters contribute one power of i each
        // plus a (-1)^b sign folded into sign_mask.
        let phase = op.phase()
            * match y_count % 4 {
                0 => c(1.0, 0.0),
                1 => c(0.0, 1.0),
                2 => c(-1.0, 0.0),
                _ => c(0.0, -1.0),
            };
        let mut out = vec![c(0.0, 0.0); self.amps.len()];
        for (idx, amp) in self.amps.iter().enumerate() {
            let sign = if (idx & sign_mask).count_ones() % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            out[idx ^ flip_mask] = amp * phase * sign;
        }
        Ok(PureState { n, amps: out })
    }
}

/// A convex mixture of pure branches representing sum_i w_i |psi_i><psi_i|.
#[derive(Debug, Clone)]
pub struct Ensemble {
    branches: Vec<(f64, PureState)>,
}

impl Ensemble {
    pub fn pure(state: PureState) -> Self {
        Ensemble {
            branches: vec![(1.0, state)],
        }
    }

    /// Weights must be positive and sum to 1 within 1e-10; all branches must
    /// share the qubit count. Zero-weight branches are dropped.
    pub fn new(branches: Vec<(f64, PureState)>) -> Result<Self> {
        let branches: Vec<(f64, PureState)> =
            branches.into_iter().filter(|(w, _)| *w > 0.0).collect();
        if branches.is_empty() {
            return Err(Error::InvalidState("ensemble has no branches".into()));
        }
        let n = branches[0].1.n_qubits();
        if branches.iter().any(|(_, s)| s.n_qubits() != n) {
            return Err(Error::DimensionMismatch(
                "ensemble branches differ in qubit count".into(),
            ));
        }
        let total: f64 = branches.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "branch weights sum to {total}, expected 1"
            )));
        }
        Ok(Ensemble { branches })
    }

    pub fn n_qubits(&self) -> usize {
        self.branches[0].1.n_qubits()
    }

    pub fn branches(&self) -> &[(f64, PureState)] {
        &self.branches
    }

    /// Tr[op rho]. For Hermitian operators the imaginary part vanishes up to
    /// round-off.
    pub fn expectation(&self, op: &PauliString) -> Result<f64> {
        let mut acc = c(0.0, 0.0);
        for (w, state) in &self.branches {
            let moved = state.apply_pauli(op)?;
            acc += state.inner(&moved)? * *w;
        }
        debug_assert!(
            !op.is_hermitian() || acc.im.abs() < 1e-10,
            "Hermitian expectation has imaginary part {}",
            acc.im
        );
        Ok(acc.re)
    }

    /// <psi| rho |psi> = sum_i w_i |<psi|psi_i>|^2.
    pub fn fidelity_with(&self, psi: &PureState) -> Result<f64> {
        let mut acc = 0.0;
        for (w, state) in &self.branches {
            acc += w * psi.inner(state)?.norm_sqr();
        }
        Ok(acc)
    }
}

/// The linear cluster state on `n` qubits: |+>^n followed by a controlled
/// phase on each nearest-neighbor pair.
pub fn cluster_state(n: usize) -> Result<PureState> {
    cluster_state_with_limit(n, DEFAULT_DENSE_LIMIT)
}

pub fn cluster_state_with_limit(n: usize, dense_limit: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "cluster state needs n >= 2, got {n}"
        )));
    }
    if n > dense_limit {
        return Err(Error::ResourceLimit(format!(
            "n={n} exceeds dense limit {dense_limit}"
        )));
    }
    let dim = 1usize << n;
    let scale = 1.0 / (dim as f64).sqrt();
    let mut amps = vec![c(scale, 0.0); dim];
    for (idx, amp) in amps.iter_mut().enumerate() {
        let mut adjacent_pairs = 0u32;
        for q in 0..n - 1 {
            let b1 = idx >> bit_of(n, q) & 1;
            let b2 = idx >> bit_of(n, q + 1) & 1;
            adjacent_pairs += (b1 & b2) as u32;
        }
        if adjacent_pairs % 2 == 1 {
            *amp = -*amp;
        }
    }
    PureState::new(amps)
}

/// The worst-case mixture: weight `lambda` on the cluster state and weight
/// `(1-lambda)/n` on each single-qubit Z flip of it.
pub fn wc_state(n: usize, lambda: f64) -> Result<Ensemble> {
    wc_state_with_limit(n, lambda, DEFAULT_DENSE_LIMIT)
}

pub fn wc_state_with_limit(n: usize, lambda: f64, dense_limit: usize) -> Result<Ensemble> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!("lambda={lambda} outside [0, 1]")));
    }
    let cluster = cluster_state_with_limit(n, dense_limit)?;
    let mut branches = Vec::with_capacity(n + 1);
    let flip_weight = (1.0 - lambda) / n as f64;
    for q in 0..n {
        if flip_weight > 0.0 {
            let z = PauliString::single(n, q, crate::pauli::Pauli::Z)?;
            branches.push((flip_weight, cluster.apply_pauli(&z)?));
        }
    }
    if lambda > 0.0 {
        branches.insert(0, (lambda, cluster));
    }
    Ensemble::new(branches)
}

/// Per-qubit action of a measurement layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QubitAction {
    /// Leave the qubit in the output register.
    Keep,
    /// Z-basis projection; outcome +1 selects |0>, -1 selects |1>.
    ClipZ { outcome: i8 },
    /// Rank-one projection. Outcome bit 0 projects onto
    /// cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>; bit 1 onto the
    /// orthogonal state sin(theta/2)|0> - e^{i phi} cos(theta/2)|1>.
    Project {
        theta: f64,
        phi: f64,
        outcome_bit: u8,
    },
}

impl QubitAction {
    /// Equatorial projector |phi, s> = (|0> + (-1)^s e^{i phi} |1>)/sqrt(2).
    pub fn equatorial(phi: f64, s: u8) -> Self {
        QubitAction::Project {
            theta: std::f64::consts::FRAC_PI_2,
            phi,
            outcome_bit: s,
        }
    }

    /// X-Z plane projector cos(theta/2)|0> + sin(theta/2)|1>.
    pub fn xz_plane(theta: f64) -> Self {
        QubitAction::Project {
            theta,
            phi: 0.0,
            outcome_bit: 0,
        }
    }

    /// Projector written in the swapped form
    /// sin(theta/2)|0> + e^{i phi} cos(theta/2)|1>; maps onto the canonical
    /// convention as (pi - theta, phi).
    pub fn swapped_form(theta: f64, phi: f64) -> Self {
        QubitAction::Project {
            theta: std::f64::consts::PI - theta,
            phi,
            outcome_bit: 0,
        }
    }

    /// Projector amplitudes on |0>, |1>.
    fn projector(&self) -> Option<[Complex64; 2]> {
        match *self {
            QubitAction::Keep => None,
            QubitAction::ClipZ { outcome } => Some(if outcome >= 0 {
                [c(1.0, 0.0), c(0.0, 0.0)]
            } else {
                [c(0.0, 0.0), c(1.0, 0.0)]
            }),
            QubitAction::Project {
                theta,
                phi,
                outcome_bit,
            } => {
                let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
                let e = Complex64::from_polar(1.0, phi);
                Some(if outcome_bit == 0 {
                    [c(ct, 0.0), e * st]
                } else {
                    [c(st, 0.0), -e * ct]
                })
            }
        }
    }
}

/// One action per qubit.
#[derive(Debug, Clone)]
pub struct MeasurementSpec {
    actions: Vec<QubitAction>,
}

impl MeasurementSpec {
    pub fn new(actions: Vec<QubitAction>) -> Self {
        MeasurementSpec { actions }
    }

    pub fn keep_all(n: usize) -> Self {
        MeasurementSpec {
            actions: vec![QubitAction::Keep; n],
        }
    }

    pub fn set(mut self, q: usize, action: QubitAction) -> Self {
        self.actions[q] = action;
        self
    }

    pub fn actions(&self) -> &[QubitAction] {
        &self.actions
    }

    fn kept_qubits(&self) -> Vec<usize> {
        self.actions
            .iter()
            .enumerate()
            .filter_map(|(q, a)| matches!(a, QubitAction::Keep).then_some(q))
            .collect()
    }
}

/// Contract the measured qubits of one branch; returns the unnormalized
/// post-measurement vector on the kept qubits.
fn project_branch(state: &PureState, actions: &[QubitAction]) -> Vec<Complex64> {
    let n = state.n_qubits();
    let kept: Vec<usize> = actions
        .iter()
        .enumerate()
        .filter_map(|(q, a)| matches!(a, QubitAction::Keep).then_some(q))
        .collect();
    let projectors: Vec<(usize, [Complex64; 2])> = actions
        .iter()
        .enumerate()
        .filter_map(|(q, a)| a.projector().map(|p| (q, p)))
        .collect();
    let mut out = vec![c(0.0, 0.0); 1 << kept.len()];
    'outer: for (idx, amp) in state.amplitudes().iter().enumerate() {
        let mut coeff = *amp;
        for &(q, ref proj) in &projectors {
            let b = idx >> bit_of(n, q) & 1;
            let p = proj[b];
            if p == c(0.0, 0.0) {
                continue 'outer;
            }
            coeff *= p.conj();
        }
        let mut out_idx = 0usize;
        for (pos, &q) in kept.iter().enumerate() {
            let b = idx >> bit_of(n, q) & 1;
            out_idx |= b << (kept.len() - 1 - pos);
        }
        out[out_idx] += coeff;
    }
    out
}

/// Project every branch on the given single-qubit outcomes.
///
/// Returns the outcome probability and the renormalized post-measurement
/// ensemble on the kept qubits. Branches with post-measurement weight below
/// [`PRUNE_THRESHOLD`] are pruned and the remaining weights renormalized.
pub fn apply_measurement(rho: &Ensemble, spec: &MeasurementSpec) -> Result<(f64, Ensemble)> {
    if spec.actions.len() != rho.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "spec covers {} qubits, state has {}",
            spec.actions.len(),
            rho.n_qubits()
        )));
    }
    let kept = spec.kept_qubits();
    if kept.is_empty() {
        return Err(Error::Domain("measurement keeps no qubits".into()));
    }
    let mut probability = 0.0;
    let mut branches = Vec::new();
    for (w, state) in rho.branches() {
        let vec = project_branch(state, spec.actions());
        let norm_sq: f64 = vec.iter().map(|a| a.norm_sqr()).sum();
        let branch_prob = w * norm_sq;
        probability += branch_prob;
        if branch_prob > 0.0 {
            branches.push((branch_prob, vec, norm_sq));
        }
    }
    if probability < IMPOSSIBLE_OUTCOME_THRESHOLD {
        return Err(Error::ImpossibleOutcome(probability));
    }
    let mut post = Vec::new();
    let mut total = 0.0;
    for (branch_prob, vec, norm_sq) in branches {
        let weight = branch_prob / probability;
        if weight < PRUNE_THRESHOLD {
            continue;
        }
        let scale = 1.0 / norm_sq.sqrt();
        let amps: Vec<Complex64> = vec.into_iter().map(|a| a * scale).collect();
        total += weight;
        post.push((weight, PureState::new(amps)?));
    }
    for (w, _) in &mut post {
        *w /= total;
    }
    Ok((probability, Ensemble::new(post)?))
}

/// Condition on Z-outcome +1 for the two neighbors of `[left, right]`, keep
/// the segment and trace out everything else.
///
/// Both boundary qubits must have a neighbor outside the segment. On a
/// perfect cluster the result is exactly the smaller cluster state; the
/// tracing of qubits beyond the clipped neighbors is exact (computational
/// branch expansion), so arbitrary ensembles are handled too.
///
/// Conditioning on -1 clip outcomes is supported through
/// [`apply_measurement`] with explicit [`QubitAction::ClipZ`] actions; it
/// flips the sign of the adjacent boundary stabilizer.
pub fn clip_segment(rho: &Ensemble, left: usize, right: usize) -> Result<Ensemble> {
    let n = rho.n_qubits();
    if left >= right || left == 0 || right + 1 >= n {
        return Err(Error::Domain(format!(
            "segment [{left}, {right}] needs outside neighbors on an {n}-qubit chain"
        )));
    }
    let far: Vec<usize> = (0..n)
        .filter(|&q| q < left.saturating_sub(1) || q > right + 1)
        .collect();
    let mut probability = 0.0;
    let mut collected: Vec<(f64, Vec<Complex64>)> = Vec::new();
    for far_bits in 0..1usize << far.len() {
        let mut actions = vec![QubitAction::Keep; n];
        actions[left - 1] = QubitAction::ClipZ { outcome: 1 };
        actions[right + 1] = QubitAction::ClipZ { outcome: 1 };
        for (pos, &q) in far.iter().enumerate() {
            let outcome = if far_bits >> pos & 1 == 0 { 1 } else { -1 };
            actions[q] = QubitAction::ClipZ { outcome };
        }
        for (w, state) in rho.branches() {
            let vec = project_branch(state, &actions);
            let norm_sq: f64 = vec.iter().map(|a| a.norm_sqr()).sum();
            let branch_prob = w * norm_sq;
            probability += branch_prob;
            if branch_prob > 0.0 {
                let scale = 1.0 / norm_sq.sqrt();
                collected.push((branch_prob, vec.into_iter().map(|a| a * scale).collect()));
            }
        }
    }
    if probability < IMPOSSIBLE_OUTCOME_THRESHOLD {
        return Err(Error::ImpossibleOutcome(probability));
    }
    let mut post = Vec::new();
    let mut total = 0.0;
    for (branch_prob, amps) in collected {
        let weight = branch_prob / probability;
        if weight < PRUNE_THRESHOLD {
            continue;
        }
        total += weight;
        post.push((weight, PureState::new(amps)?));
    }
    for (w, _) in &mut post {
        *w /= total;
    }
    Ensemble::new(post)
}

/// A 4x4 Hermitian unit-trace operator on a pair of qubits.
#[derive(Debug, Clone)]
pub struct TwoQubitState {
    m: Matrix4<Complex64>,
}

/// Hermiticity / trace tolerance for two-qubit states.
pub const STATE_TOL: f64 = 1e-10;

/// Smallest admissible eigenvalue of a two-qubit state.
pub const PSD_TOL: f64 = -1e-9;

impl TwoQubitState {
    /// Validate hermiticity (1e-10), unit trace (1e-10) and positivity
    /// (minimum eigenvalue >= -1e-9), then store the Hermitian part.
    pub fn new(m: Matrix4<Complex64>) -> Result<Self> {
        let herm_dev = (m - m.adjoint())
            .iter()
            .map(|e| e.norm())
            .fold(0.0, f64::max);
        if herm_dev > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "hermiticity deviation {herm_dev:.3e}"
            )));
        }
        let m = (m + m.adjoint()).scale(0.5);
        let trace = m.trace();
        if (trace.re - 1.0).abs() > STATE_TOL || trace.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "trace {trace} deviates from 1"
            )));
        }
        let eigs = nalgebra::SymmetricEigen::new(m).eigenvalues;
        let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < PSD_TOL {
            return Err(Error::InvalidState(format!(
                "minimum eigenvalue {min_eig:.3e} below tolerance"
            )));
        }
        Ok(TwoQubitState { m })
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.m
    }

    /// Density operator of a two-qubit ensemble.
    pub fn from_ensemble(rho: &Ensemble) -> Result<Self> {
        if rho.n_qubits() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "expected a 2-qubit ensemble, got {}",
                rho.n_qubits()
            )));
        }
        let mut m = Matrix4::from_element(c(0.0, 0.0));
        for (w, state) in rho.branches() {
            let a = state.amplitudes();
            for i in 0..4 {
                for j in 0..4 {
                    m[(i, j)] += a[i] * a[j].conj() * *w;
                }
            }
        }
        TwoQubitState::new(m)
    }
}

/// Partial trace down to qubits `a` and `b` (in that tensor order).
pub fn reduced_two_qubit(rho: &Ensemble, a: usize, b: usize) -> Result<TwoQubitState> {
    let n = rho.n_qubits();
    if a == b || a >= n || b >= n {
        return Err(Error::Domain(format!(
            "invalid qubit pair ({a}, {b}) on {n} qubits"
        )));
    }
    let rest: Vec<usize> = (0..n).filter(|&q| q != a && q != b).collect();
    let mut m = Matrix4::from_element(c(0.0, 0.0));
    for (w, state) in rho.branches() {
        // Group amplitudes by the computational assignment of the traced
        // qubits and accumulate one outer product per group.
        let mut groups: Vec<[Complex64; 4]> = vec![[c(0.0, 0.0); 4]; 1 << rest.len()];
        for (idx, amp) in state.amplitudes().iter().enumerate() {
            let ab = (idx >> bit_of(n, a) & 1) << 1 | idx >> bit_of(n, b) & 1;
            let mut rest_idx = 0usize;
            for (pos, &q) in rest.iter().enumerate() {
                rest_idx |= (idx >> bit_of(n, q) & 1) << pos;
            }
            groups[rest_idx][ab] = *amp;
        }
        for group in groups {
            for i in 0..4 {
                for j in 0..4 {
                    m[(i, j)] += group[i] * group[j].conj() * *w;
                }
            }
        }
    }
    TwoQubitState::new(m)
}

// --- JSON fixtures -------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct BranchJson {
    weight: f64,
    amplitudes: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct EnsembleJson {
    n: usize,
    branches: Vec<BranchJson>,
}

/// Serialize an ensemble as `{n, branches: [{weight, amplitudes: [[re, im], ..]}]}`.
pub fn ensemble_to_json(rho: &Ensemble) -> String {
    let fixture = EnsembleJson {
        n: rho.n_qubits(),
        branches: rho
            .branches()
            .iter()
            .map(|(w, s)| BranchJson {
                weight: *w,
                amplitudes: s.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&fixture).expect("ensemble fixtures always serialize")
}

pub fn ensemble_from_json(text: &str) -> Result<Ensemble> {
    let fixture: EnsembleJson =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let branches = fixture
        .branches
        .into_iter()
        .map(|b| {
            let amps: Vec<Complex64> = b.amplitudes.iter().map(|[re, im]| c(*re, *im)).collect();
            if amps.len() != 1 << fixture.n {
                return Err(Error::DimensionMismatch(format!(
                    "branch has {} amplitudes, expected {}",
                    amps.len(),
                    1 << fixture.n
                )));
            }
            Ok((b.weight, PureState::new(amps)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(branches)
}
