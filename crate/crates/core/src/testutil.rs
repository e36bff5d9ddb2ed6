//! Test-only dense oracles: literal matrix representations of Pauli
//! operators and density operators, independent of the symplectic and
//! ensemble code paths they are used to check.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::densesim::{Ensemble, PureState};
use crate::pauli::{Pauli, PauliString};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn letter_matrix(p: Pauli) -> DMatrix<Complex64> {
    let entries = match p {
        Pauli::I => [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        Pauli::X => [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        Pauli::Y => [c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
        Pauli::Z => [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
    };
    DMatrix::from_row_slice(2, 2, &entries)
}

/// Kronecker product of the letters (qubit 0 leftmost), times the phase.
pub fn dense_pauli(p: &PauliString) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(1, 1, p.phase());
    for q in 0..p.n_qubits() {
        m = m.kronecker(&letter_matrix(p.letter(q)));
    }
    m
}

pub fn dense_matrices_equal(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, tol: f64) -> bool {
    a.shape() == b.shape() && (a - b).iter().all(|e| e.norm() <= tol)
}

/// Literal density operator of an ensemble as a 2^n x 2^n matrix.
pub fn dense_density(rho: &Ensemble) -> DMatrix<Complex64> {
    let dim = 1usize << rho.n_qubits();
    let mut m = DMatrix::from_element(dim, dim, c(0.0, 0.0));
    for (w, state) in rho.branches() {
        let v = DMatrix::from_column_slice(dim, 1, state.amplitudes());
        m += (v.clone() * v.adjoint()).scale(*w);
    }
    m
}

/// Tr[P rho] computed with literal matrices.
pub fn dense_expectation(rho: &Ensemble, op: &PauliString) -> Complex64 {
    (dense_pauli(op) * dense_density(rho)).trace()
}

/// Uniformly random Pauli string; Hermitian phase only when `hermitian`.
pub fn random_pauli<R: Rng>(rng: &mut R, n: usize, hermitian: bool) -> PauliString {
    loop {
        let letters: Vec<Pauli> = (0..n)
            .map(|_| match rng.random_range(0..4u8) {
                0 => Pauli::I,
                1 => Pauli::X,
                2 => Pauli::Y,
                _ => Pauli::Z,
            })
            .collect();
        let mut p = PauliString::from_letters(&letters);
        if rng.random::<bool>() {
            p = p.negated();
        }
        let _ = hermitian; // non-Hermitian phases are not produced here
        if p.weight() > 0 {
            return p;
        }
    }
}

/// Haar-like random pure state (normalized complex Gaussian amplitudes).
pub fn random_pure_state<R: Rng>(rng: &mut R, n: usize) -> PureState {
    let dim = 1usize << n;
    let mut amps: Vec<Complex64> = (0..dim)
        .map(|_| {
            // Box-Muller pairs
            let u1: f64 = rng.random::<f64>().max(1e-12);
            let u2: f64 = rng.random();
            let r = (-2.0 * u1.ln()).sqrt();
            c(
                r * (2.0 * std::f64::consts::PI * u2).cos(),
                r * (2.0 * std::f64::consts::PI * u2).sin(),
            )
        })
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    PureState::new(amps).unwrap()
}

/// Random few-branch ensemble with normalized weights.
pub fn random_ensemble<R: Rng>(rng: &mut R, n: usize, max_branches: usize) -> Ensemble {
    let k = rng.random_range(1..=max_branches);
    let mut weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let branches = weights
        .into_iter()
        .map(|w| (w, random_pure_state(rng, n)))
        .collect();
    Ensemble::new(branches).unwrap()
}
