//! Certification formulas: localizable-entanglement floors from a single
//! three-qubit correlator, the direct bound from a measured correlator
//! triplet, fidelity floors, fully-entangled-fraction and teleportation
//! floors, worst-case mixing parameter conversion and threshold curves.
//!
//! Raw (unclamped) values are reported alongside clamped ones: a negative
//! raw floor tells how far a source is from certification.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::Serialize;

use crate::densesim::TwoQubitState;
use crate::entanglement::{concurrence, kron2, pauli_matrix};
use crate::error::{Error, Result};

/// Floor on the entanglement localizable between two qubits separated by
/// k - 1 measured qubits, before clamping: 1 - (k+1)(1-z).
pub fn le_floor_pair_raw(z: f64, k: u32) -> f64 {
    1.0 - (k as f64 + 1.0) * (1.0 - z)
}

/// max{0, 1 - (k+1)(1-z)}.
///
/// k = 1 (adjacent targets, no measured qubit in between) is evaluated as
/// the formula states even though that regime is rarely of interest.
pub fn le_floor_pair(z: f64, k: u32) -> f64 {
    le_floor_pair_raw(z, k).max(0.0)
}

/// Floor across an n-qubit clipped segment, before clamping: 1 - n(1-z).
pub fn le_floor_segment_raw(z: f64, n: u32) -> f64 {
    1.0 - n as f64 * (1.0 - z)
}

/// max{0, 1 - n(1-z)}; identical to [`le_floor_pair`] at k = n - 1.
pub fn le_floor_segment(z: f64, n: u32) -> f64 {
    le_floor_segment_raw(z, n).max(0.0)
}

/// The correlator value at which the pair floor reaches zero.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThresholdZ {
    pub numerator: u64,
    pub denominator: u64,
    pub value: f64,
}

/// Smallest z certifying nonzero entanglement across `measured_qubits`
/// measured qubits: k/(k+1) with k = measured_qubits + 1, exact rational.
pub fn threshold_z(measured_qubits: u32) -> Result<ThresholdZ> {
    if measured_qubits < 1 {
        return Err(Error::Domain("measured_qubits must be >= 1".into()));
    }
    let k = u64::from(measured_qubits) + 1;
    Ok(ThresholdZ {
        numerator: k,
        denominator: k + 1,
        value: k as f64 / (k + 1) as f64,
    })
}

/// The two-qubit operator 1/4 (1 + b1 ZxY + b2 YxZ + b3 XxX) built from a
/// measured correlator triplet.
pub fn correlator_state(b1: f64, b2: f64, b3: f64) -> Matrix4<Complex64> {
    let mut m = kron2(&pauli_matrix(0), &pauli_matrix(0));
    m += kron2(&pauli_matrix(3), &pauli_matrix(2)).scale(b1);
    m += kron2(&pauli_matrix(2), &pauli_matrix(3)).scale(b2);
    m += kron2(&pauli_matrix(1), &pauli_matrix(1)).scale(b3);
    m.scale(0.25)
}

/// Direct entanglement floor from three measured correlators: the
/// concurrence of [`correlator_state`]. For nonnegative inputs this equals
/// the triplet closed form.
///
/// A non-positive-semidefinite correlator state means the three values are
/// mutually inconsistent (no physical state produces them); shrink noisy
/// estimates toward zero before calling (see
/// [`crate::estimation::shrink_toward_zero`]).
pub fn direct_bound(b1: f64, b2: f64, b3: f64) -> Result<f64> {
    let state = TwoQubitState::new(correlator_state(b1, b2, b3)).map_err(|_| {
        Error::InconsistentCorrelators(format!("({b1}, {b2}, {b3}) admits no physical state"))
    })?;
    concurrence(&state)
}

/// Fidelity floor with the ideal cluster state from a full list of
/// generator expectations: 1 - sum_i (1 - <K_i>) / 2.
pub fn fidelity_floor_general(gen_expectations: &[f64]) -> Result<f64> {
    if let Some(bad) = gen_expectations.iter().find(|v| v.abs() > 1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "generator expectation {bad} outside [-1, 1]"
        )));
    }
    Ok(1.0 - 0.5 * gen_expectations.iter().map(|v| 1.0 - v).sum::<f64>())
}

/// Floor on the fully entangled fraction from a triplet sum: (1 + T)/4.
pub fn fef_floor_from_triplet(t_sum: f64) -> f64 {
    (1.0 + t_sum) / 4.0
}

/// Teleportation-fidelity floor across an n-qubit segment, before clamping:
/// 1 - (n/3)(1-z).
pub fn teleport_floor_raw(z: f64, n: u32) -> f64 {
    1.0 - n as f64 / 3.0 * (1.0 - z)
}

/// [`teleport_floor_raw`] floored at 1/2, the fidelity any separable pure
/// channel state already achieves.
pub fn teleport_floor(z: f64, n: u32) -> f64 {
    teleport_floor_raw(z, n).max(0.5)
}

/// Mixing parameter of the worst-case state consistent with correlator `z`
/// on an n-qubit segment: 1 - n(1-z)/2.
///
/// Below z = 1 - 2/n the construction does not exist.
pub fn wc_lambda(z: f64, n: u32) -> Result<f64> {
    if z > 1.0 + 1e-12 {
        return Err(Error::Domain(format!("z={z} above 1")));
    }
    let lambda = 1.0 - n as f64 * (1.0 - z) / 2.0;
    if lambda < -1e-12 {
        return Err(Error::NoWcState(format!(
            "z={z} below 1 - 2/{n}; mixing parameter would be {lambda}"
        )));
    }
    Ok(lambda.clamp(0.0, 1.0))
}

/// Inverse of [`wc_lambda`]: the correlator value of the worst-case state
/// with mixing parameter `lambda` on n qubits.
pub fn wc_z(lambda: f64, n: u32) -> f64 {
    1.0 - 2.0 * (1.0 - lambda) / n as f64
}

/// How a report's span column is to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpanKind {
    MeasuredQubits,
    SegmentSize,
}

/// Span between the two target qubits, as a measured-qubit count or as a
/// clipped segment size (segment n <-> n - 2 measured qubits).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Span {
    MeasuredQubits(u32),
    Segment(u32),
}

impl Span {
    pub fn kind(self) -> SpanKind {
        match self {
            Span::MeasuredQubits(_) => SpanKind::MeasuredQubits,
            Span::Segment(_) => SpanKind::SegmentSize,
        }
    }

    pub fn value(self) -> u32 {
        match self {
            Span::MeasuredQubits(v) | Span::Segment(v) => v,
        }
    }

    /// Equivalent clipped segment size.
    pub fn segment_size(self) -> u32 {
        match self {
            Span::MeasuredQubits(m) => m + 2,
            Span::Segment(n) => n,
        }
    }
}

/// Every floor the toolkit derives from one correlator value across one
/// span, with raw (unclamped) companions.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub z: f64,
    pub span: u32,
    pub span_kind: SpanKind,
    pub le_floor: f64,
    pub le_floor_raw: f64,
    pub fidelity_floor: f64,
    pub fef_floor: f64,
    pub fef_floor_raw: f64,
    pub teleport_floor: f64,
    pub teleport_floor_raw: f64,
}

impl BoundReport {
    pub fn from_z_span(z: f64, span: Span) -> Self {
        let n = span.segment_size();
        // Triplet sum of the worst case consistent with z: (4 + 2(n-2)) of
        // the generator floor plus three unit offsets.
        let t_sum = 2.0 * n as f64 * (z - 1.0) + 3.0;
        let fef_raw = fef_floor_from_triplet(t_sum);
        BoundReport {
            z,
            span: span.value(),
            span_kind: span.kind(),
            le_floor: le_floor_segment(z, n),
            le_floor_raw: le_floor_segment_raw(z, n),
            fidelity_floor: 1.0 - n as f64 * (1.0 - z) / 2.0,
            fef_floor: fef_raw.clamp(0.0, 1.0),
            fef_floor_raw: fef_raw,
            teleport_floor: teleport_floor(z, n),
            teleport_floor_raw: teleport_floor_raw(z, n),
        }
    }

    pub fn csv_header() -> &'static str {
        "z,span,le_floor,fidelity_floor,fef_floor,teleport_floor"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.z,
            self.span,
            self.le_floor,
            self.fidelity_floor,
            self.fef_floor,
            self.teleport_floor
        )
    }
}
