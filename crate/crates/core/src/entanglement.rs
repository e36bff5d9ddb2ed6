//! Two-qubit entanglement and usefulness measures: Wootters concurrence,
//! the closed form for correlation-triplet states, the four-qubit X-state
//! closed form, fully entangled fraction and teleportation fidelity.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;

use crate::densesim::TwoQubitState;
use crate::error::{Error, Result};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub(crate) fn pauli_matrix(i: usize) -> Matrix2<Complex64> {
    match i {
        0 => Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)),
        1 => Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
        2 => Matrix2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)),
        3 => Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)),
        _ => unreachable!("Pauli index in 0..4"),
    }
}

pub(crate) fn kron2(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Matrix4<Complex64> {
    let mut out = Matrix4::from_element(c(0.0, 0.0));
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Wootters concurrence from the spin-flip spectrum: with l_i the
/// descending square-rooted eigenvalues of rho (Y x Y) rho* (Y x Y),
/// returns max{0, l1 - l2 - l3 - l4}.
///
/// Factoring rho = V V+ over its (clamped) eigenpairs, the l_i are the
/// singular values of the complex symmetric matrix V^T (Y x Y) V. Computing
/// them by SVD avoids square roots of near-zero eigenvalues, which would
/// cost half the working precision on rank-deficient states.
pub fn concurrence(rho: &TwoQubitState) -> Result<f64> {
    Ok(spin_flip_difference(rho)?.clamp(0.0, 1.0))
}

/// The spin-flip spectrum difference l1 - l2 - l3 - l4 without the final
/// clamp. Equals the concurrence when positive; on separable states it is
/// negative and still varies, which gives angle searches slope information
/// across the plateau where the concurrence itself is identically zero.
pub fn spin_flip_difference(rho: &TwoQubitState) -> Result<f64> {
    let eig = SymmetricEigen::new(*rho.matrix());
    let mut factor = Matrix4::from_element(c(0.0, 0.0));
    for i in 0..4 {
        let e = eig.eigenvalues[i];
        if e < crate::densesim::PSD_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {e:.3e} beyond tolerance"
            )));
        }
        let scale = c(e.max(0.0).sqrt(), 0.0);
        for r in 0..4 {
            factor[(r, i)] = eig.eigenvectors[(r, i)] * scale;
        }
    }
    let yy = kron2(&pauli_matrix(2), &pauli_matrix(2));
    let tau = factor.transpose() * yy * factor;
    let mut lambdas: Vec<f64> = tau
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .collect();
    lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3])
}

/// Correlation triplet of a state 1/4 (1 + sum_i t_i s_i x s_i'), with any
/// measured minus signs absorbed into a local relabeling and recorded for
/// traceability.
#[derive(Debug, Clone, Copy)]
pub struct TripletValues {
    values: [f64; 3],
    /// Sign of the raw value each component was absorbed from.
    absorbed_signs: [i8; 3],
}

impl TripletValues {
    /// Nonnegative triplet; each value must lie in [0, 1].
    pub fn new(t1: f64, t2: f64, t3: f64) -> Result<Self> {
        Self::from_raw([t1, t2, t3]).and_then(|t| {
            if t.absorbed_signs.iter().any(|&s| s < 0) {
                Err(Error::Domain("triplet values must be nonnegative".into()))
            } else {
                Ok(t)
            }
        })
    }

    /// Absorb signs of raw measured values; magnitudes must not exceed 1.
    pub fn from_raw(raw: [f64; 3]) -> Result<Self> {
        if raw.iter().any(|v| v.abs() > 1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "triplet value outside [-1, 1]: {raw:?}"
            )));
        }
        let mut values = [0.0; 3];
        let mut absorbed_signs = [1i8; 3];
        for i in 0..3 {
            values[i] = raw[i].abs().min(1.0);
            absorbed_signs[i] = if raw[i] < 0.0 { -1 } else { 1 };
        }
        Ok(TripletValues {
            values,
            absorbed_signs,
        })
    }

    pub fn values(&self) -> [f64; 3] {
        self.values
    }

    /// Which components had a minus sign absorbed.
    pub fn absorbed_signs(&self) -> [i8; 3] {
        self.absorbed_signs
    }

    /// Triplet sum T = t1 + t2 + t3.
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Closed-form concurrence of a triplet state: max{0, (t1 + t2 + t3 - 1)/2}.
pub fn t_state_concurrence(t: &TripletValues) -> f64 {
    ((t.sum() - 1.0) / 2.0).max(0.0)
}

/// The four magic-basis vectors (Bell states with fixed phases); maximally
/// entangled pure states have real coefficient vectors in this basis.
fn magic_basis() -> [Vector4<Complex64>; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        Vector4::new(c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)),
        Vector4::new(c(0.0, s), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -s)),
        Vector4::new(c(0.0, 0.0), c(0.0, s), c(0.0, s), c(0.0, 0.0)),
        Vector4::new(c(0.0, 0.0), c(s, 0.0), c(-s, 0.0), c(0.0, 0.0)),
    ]
}

/// Fully entangled fraction: the maximum overlap with a maximally entangled
/// state reachable by a one-sided local unitary.
///
/// Computed exactly as the largest eigenvalue of the real part of rho
/// expressed in the magic basis (the direct unitary maximization is kept as
/// a test oracle only).
pub fn fully_entangled_fraction(rho: &TwoQubitState) -> Result<f64> {
    let basis = magic_basis();
    let mut real_part = nalgebra::Matrix4::<f64>::zeros();
    for j in 0..4 {
        for k in 0..4 {
            let val = (basis[j].adjoint() * rho.matrix() * basis[k])[(0, 0)];
            real_part[(j, k)] = val.re;
        }
    }
    let real_part = (real_part + real_part.transpose()).scale(0.5);
    let eigs = SymmetricEigen::new(real_part).eigenvalues;
    Ok(eigs
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        .clamp(0.0, 1.0))
}

/// Teleportation fidelity enabled by a channel state of fully entangled
/// fraction `fef`: (1 + 2 fef) / 3.
pub fn teleport_fidelity(fef: f64) -> f64 {
    (1.0 + 2.0 * fef) / 3.0
}

/// Closed-form concurrence of the state obtained from the four-qubit
/// worst-case mixture by X-Z plane measurements on its middle qubits:
/// max{0, (3 lambda - 1) S / 2 + (lambda - 1) / 2} with
/// S = sin(theta2) sin(theta3).
pub fn x_state_concurrence_wc4(lambda: f64, theta2: f64, theta3: f64) -> f64 {
    let s = theta2.sin() * theta3.sin();
    (0.5 * (3.0 * lambda - 1.0) * s + 0.5 * (lambda - 1.0)).max(0.0)
}

/// Local Bloch vectors and correlation matrix of a two-qubit state.
#[derive(Debug, Clone, Copy)]
pub struct BlochDecomposition {
    pub r: [f64; 3],
    pub s: [f64; 3],
    pub t_matrix: [[f64; 3]; 3],
}

/// r_i = <s_i x 1>, s_j = <1 x s_j>, T_ij = <s_i x s_j>.
pub fn bloch_decompose(rho: &TwoQubitState) -> BlochDecomposition {
    let m = rho.matrix();
    let expect =
        |a: usize, b: usize| -> f64 { (kron2(&pauli_matrix(a), &pauli_matrix(b)) * m).trace().re };
    let mut out = BlochDecomposition {
        r: [0.0; 3],
        s: [0.0; 3],
        t_matrix: [[0.0; 3]; 3],
    };
    for i in 0..3 {
        out.r[i] = expect(i + 1, 0);
        out.s[i] = expect(0, i + 1);
        for j in 0..3 {
            out.t_matrix[i][j] = expect(i + 1, j + 1);
        }
    }
    out
}

/// Rebuild 1/4 (1 + r.s x 1 + 1 x s.s + sum T_ij s_i x s_j) from a
/// decomposition.
pub fn bloch_reconstruct(b: &BlochDecomposition) -> Matrix4<Complex64> {
    let mut m = kron2(&pauli_matrix(0), &pauli_matrix(0));
    for i in 0..3 {
        m += kron2(&pauli_matrix(i + 1), &pauli_matrix(0)).scale(b.r[i]);
        m += kron2(&pauli_matrix(0), &pauli_matrix(i + 1)).scale(b.s[i]);
        for j in 0..3 {
            m += kron2(&pauli_matrix(i + 1), &pauli_matrix(j + 1)).scale(b.t_matrix[i][j]);
        }
    }
    m.scale(0.25)
}
