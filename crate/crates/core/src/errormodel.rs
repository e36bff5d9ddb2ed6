//! A photon-string cluster source with independent Pauli-Y errors on the
//! emitter spin.
//!
//! Each emission cycle entangles the spin with a fresh photon
//! (|0> -> |0>|0_ph>, |1> -> |1>|1_ph>), applies a Y error with probability
//! `p_y`, then a Hadamard on the spin. The spin is kept as the final chain
//! qubit; at p_y = 0 the output is exactly the (n+1)-qubit linear cluster
//! state with photons in emission order followed by the spin.
//!
//! The error is placed between emissions (after each emission, before the
//! next). That placement makes every interior generator expectation equal
//! ((1-2p)^2, the boundary generators get (1-2p)), so the chain satisfies
//! weak translational invariance exactly.
//!
//! Two evaluation paths are provided: [`emit_state`] enumerates all 2^n
//! error patterns into a dense ensemble (exact, no sampling noise, capped by
//! `dense_limit`), and [`correlator_analytic`] back-propagates a stabilizer
//! through the emission circuit and multiplies one (1-2p) factor per error
//! site whose propagated operator anticommutes with Y on the spin wire.

use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeSet;

use crate::bounds::{le_floor_segment, le_floor_segment_raw, threshold_z};
use crate::densesim::{Ensemble, PureState};
use crate::entanglement::{t_state_concurrence, TripletValues};
use crate::error::{Error, Result};
use crate::pauli::{surviving_triplet, GeneratorSet, MeasBasis, Pauli, PauliString};

/// Source configuration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SourceParams {
    pub n_photons: usize,
    /// Probability of a Y error on the emitter spin per emission cycle.
    pub p_y: f64,
    /// Cap for the dense error-pattern enumeration.
    pub dense_limit: usize,
}

/// Default cap on photons for dense error-pattern enumeration.
pub const DEFAULT_EMIT_DENSE_LIMIT: usize = 10;

impl SourceParams {
    pub fn new(n_photons: usize, p_y: f64) -> Result<Self> {
        if n_photons < 1 {
            return Err(Error::Domain("n_photons must be >= 1".into()));
        }
        if !(0.0..=0.5).contains(&p_y) {
            return Err(Error::Domain(format!("p_y={p_y} outside [0, 1/2]")));
        }
        Ok(SourceParams {
            n_photons,
            p_y,
            dense_limit: DEFAULT_EMIT_DENSE_LIMIT,
        })
    }

    pub fn with_dense_limit(mut self, dense_limit: usize) -> Self {
        self.dense_limit = dense_limit;
        self
    }

    /// Chain length of the output (photons plus the spin).
    pub fn chain_qubits(&self) -> usize {
        self.n_photons + 1
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dense output ensemble over all 2^n error patterns.
pub fn emit_state(params: &SourceParams) -> Result<Ensemble> {
    let n = params.n_photons;
    if n > params.dense_limit {
        return Err(Error::ResourceLimit(format!(
            "n_photons={n} exceeds dense limit {}; use correlator_analytic",
            params.dense_limit
        )));
    }
    let chain = params.chain_qubits();
    let dim = 1usize << chain;
    let p = params.p_y;
    // Qubit q < n is photon q (emission order); qubit n is the spin. Qubit q
    // sits at bit chain-1-q of the amplitude index.
    let spin_bit = 0usize; // bit position of the spin qubit
    let mut branches = Vec::new();
    for pattern in 0u64..1 << n {
        let errors = pattern.count_ones();
        let weight = p.powi(errors as i32) * (1.0 - p).powi((n as u32 - errors) as i32);
        if weight <= 0.0 {
            continue;
        }
        // Spin in |+>, photons in |0>.
        let mut amps = vec![c(0.0, 0.0); dim];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        amps[0] = c(s, 0.0);
        amps[1 << spin_bit] = c(s, 0.0);
        for t in 0..n {
            let photon_bit = chain - 1 - t;
            // Emission: CNOT spin -> photon t (photon is |0>).
            for idx in 0..dim {
                if idx >> spin_bit & 1 == 1 && idx >> photon_bit & 1 == 0 {
                    amps.swap(idx, idx | 1 << photon_bit);
                }
            }
            // Y error on the spin for this pattern bit.
            if pattern >> t & 1 == 1 {
                for idx in 0..dim {
                    if idx >> spin_bit & 1 == 0 {
                        let partner = idx | 1 << spin_bit;
                        let (a0, a1) = (amps[idx], amps[partner]);
                        // Y|0> = i|1>, Y|1> = -i|0>
                        amps[idx] = c(0.0, -1.0) * a1;
                        amps[partner] = c(0.0, 1.0) * a0;
                    }
                }
            }
            // Hadamard on the spin.
            for idx in 0..dim {
                if idx >> spin_bit & 1 == 0 {
                    let partner = idx | 1 << spin_bit;
                    let (a0, a1) = (amps[idx], amps[partner]);
                    amps[idx] = (a0 + a1) * s;
                    amps[partner] = (a0 - a1) * s;
                }
            }
        }
        branches.push((weight, PureState::new(amps)?));
    }
    Ensemble::new(branches)
}

/// Single-qubit letters track through the backward pass as (letter, sign).
fn conjugate_hadamard(letter: Pauli, sign: f64) -> (Pauli, f64) {
    match letter {
        Pauli::I => (Pauli::I, sign),
        Pauli::X => (Pauli::Z, sign),
        Pauli::Z => (Pauli::X, sign),
        Pauli::Y => (Pauli::Y, -sign),
    }
}

/// Pull (spin_letter x photon_letter) back through the emission isometry.
/// Defined only when both letters are diagonal or both antidiagonal.
fn contract_emission(spin: Pauli, photon: Pauli) -> Option<(Pauli, f64)> {
    use Pauli::*;
    match (spin, photon) {
        (I, I) => Some((I, 1.0)),
        (I, Z) => Some((Z, 1.0)),
        (Z, I) => Some((Z, 1.0)),
        (Z, Z) => Some((I, 1.0)),
        (X, X) => Some((X, 1.0)),
        (X, Y) => Some((Y, 1.0)),
        (Y, X) => Some((Y, 1.0)),
        (Y, Y) => Some((X, -1.0)),
        _ => None,
    }
}

/// Exact expectation of a stabilizer-group element of the ideal output
/// chain in the error-model output, at any chain length.
pub fn correlator_analytic(op: &PauliString, params: &SourceParams) -> Result<f64> {
    let chain = params.chain_qubits();
    if op.n_qubits() != chain {
        return Err(Error::DimensionMismatch(format!(
            "operator on {} qubits, chain has {}",
            op.n_qubits(),
            chain
        )));
    }
    if !op.is_hermitian() {
        return Err(Error::Domain(
            "correlator operator must be Hermitian".into(),
        ));
    }
    let attenuation = 1.0 - 2.0 * params.p_y;
    let mut factor = 1.0;
    let mut sign = if op.phase_exp() == 2 { -1.0 } else { 1.0 };
    let mut spin = op.letter(params.n_photons);
    for t in (0..params.n_photons).rev() {
        let (after_h, s) = conjugate_hadamard(spin, 1.0);
        sign *= s;
        // Error site t sits between emission t and the Hadamard.
        if matches!(after_h, Pauli::X | Pauli::Z) {
            factor *= attenuation;
        }
        let Some((contracted, s)) = contract_emission(after_h, op.letter(t)) else {
            return Err(Error::Domain(format!(
                "{op} is not a stabilizer of the ideal output chain"
            )));
        };
        sign *= s;
        spin = contracted;
    }
    // The initial spin state is |+>; stabilizers reduce to +I or +X on it.
    match spin {
        Pauli::I | Pauli::X => {}
        _ => {
            return Err(Error::Domain(format!(
                "{op} is not a stabilizer of the ideal output chain"
            )))
        }
    }
    if sign < 0.0 {
        return Err(Error::Domain(format!(
            "{op} is the negative of a stabilizer of the ideal output chain"
        )));
    }
    Ok(sign * factor)
}

/// Interior generator expectation of the source chain, (1-2p)^2; the value
/// every Z-X-Z window measures under weak translational invariance.
pub fn interior_z(p_y: f64) -> Result<f64> {
    let params = SourceParams::new(4, p_y)?;
    let gens = GeneratorSet::cluster(params.chain_qubits())?;
    correlator_analytic(gens.get(2), &params)
}

/// Triplet expectation values of the Y-measurement surviving stabilizers
/// for a segment of `segment` qubits embedded in the bulk of a long chain.
fn bulk_y_triplet(segment: usize, p_y: f64) -> Result<TripletValues> {
    // Two padding qubits on each side keep every involved generator in the
    // interior of the chain.
    let offset = 2usize;
    let chain = segment + 2 * offset;
    let params = SourceParams::new(chain - 1, p_y)?;
    let gens = GeneratorSet::cluster(chain)?;
    let triplet = surviving_triplet(segment, &vec![MeasBasis::Y; segment - 2])?;
    let mut values = [0.0; 3];
    for (slot, element) in triplet.iter().enumerate() {
        let shifted: BTreeSet<usize> = element
            .generator_indices
            .iter()
            .map(|&i| i + offset)
            .collect();
        let full = gens.compose(&shifted)?;
        values[slot] = correlator_analytic(&full.operator, &params)?;
    }
    TripletValues::from_raw(values)
}

/// Direct bound across `measured` qubits measured in the Y basis, from
/// analytically evaluated triplet correlators.
fn direct_value(measured: usize, p_y: f64) -> Result<f64> {
    let t = bulk_y_triplet(measured + 2, p_y)?;
    Ok(t_state_concurrence(&t))
}

/// One row of the range comparison table.
#[derive(Debug, Clone, Serialize)]
pub struct RangeRow {
    pub p: f64,
    /// Interior correlator value z(p).
    pub zxz_value: f64,
    /// Largest measured-qubit span certified by the correlator floor.
    pub zxz_range: usize,
    /// Largest measured-qubit span certified by the direct bound.
    pub direct_range: usize,
    /// Direct bound across three measured qubits.
    pub le3_direct: f64,
    /// Correlator floor across three measured qubits.
    pub le3_zxz: f64,
}

impl RangeRow {
    pub fn csv_header() -> &'static str {
        "p,zxz_value,zxz_range,direct_range,le3_direct,le3_zxz"
    }
}

/// Largest certified spans for each error probability, both bounds capped
/// at `max_span` measured qubits.
pub fn compare_ranges(p_grid: &[f64], max_span: usize) -> Result<Vec<RangeRow>> {
    if max_span < 1 {
        return Err(Error::Domain("max_span must be >= 1".into()));
    }
    let mut rows = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        let z = interior_z(p)?;
        let mut zxz_range = 0usize;
        for measured in 1..=max_span {
            if z > threshold_z(measured as u32)?.value {
                zxz_range = measured;
            } else {
                break;
            }
        }
        let mut direct_range = 0usize;
        for measured in 1..=max_span {
            if direct_value(measured, p)? > 0.0 {
                direct_range = measured;
            } else {
                break;
            }
        }
        let (le3_direct, le3_zxz) = le3_values(p)?;
        rows.push(RangeRow {
            p,
            zxz_value: z,
            zxz_range,
            direct_range,
            le3_direct,
            le3_zxz,
        });
    }
    Ok(rows)
}

/// Both bounds across three measured qubits (a five-qubit segment).
pub fn le3_values(p: f64) -> Result<(f64, f64)> {
    let direct = direct_value(3, p)?;
    let zxz = le_floor_segment(interior_z(p)?, 5);
    Ok((direct, zxz))
}

/// Raw (unclamped) three-measured-qubit bounds, used for root finding.
pub fn le3_values_raw(p: f64) -> Result<(f64, f64)> {
    let t = bulk_y_triplet(5, p)?;
    let direct = (t.sum() - 1.0) / 2.0;
    let zxz = le_floor_segment_raw(interior_z(p)?, 5);
    Ok((direct, zxz))
}
