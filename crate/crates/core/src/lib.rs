//! Certification toolkit for linear cluster-state sources.
//!
//! A photon source that emits long strings of entangled photons cannot be
//! characterized by tomography: the measurement cost grows exponentially
//! with the string length and with the inverse detection efficiency. This
//! crate implements the cheaper route: estimate a single three-qubit
//! correlator from polarization measurements, and convert it into certified
//! floors on the localizable entanglement, cluster-state fidelity, fully
//! entangled fraction and teleportation fidelity across any number of
//! qubits.
//!
//! The pieces:
//!
//! - [`pauli`]: exact stabilizer algebra on symplectic bit strings:
//!   cluster generators, products of generator subsets, and the three
//!   stabilizers surviving an X/Y measurement sequence (a GF(2) kernel
//!   solve, no group enumeration).
//! - [`densesim`]: dense statevector/ensemble simulation of small chains:
//!   cluster and worst-case states, projective measurements, clipping,
//!   reduced states. The brute-force oracle for everything else.
//! - [`entanglement`]: Wootters concurrence, triplet and X-state closed
//!   forms, fully entangled fraction, teleportation fidelity.
//! - [`bounds`]: the certification formulas and threshold curves.
//! - [`errormodel`]: a photon-string source with independent Y errors on
//!   the emitter spin, with an exact analytic correlator evaluator.
//! - [`estimation`]: simulated lossy detection, distribution-free
//!   correlator estimates and certified reports.
//! - [`localize`]: measurement-angle optimization of localized
//!   entanglement (Nelder-Mead with seeded restarts) and closed-form
//!   cross-checks.

pub mod bounds;
pub mod densesim;
pub mod entanglement;
pub mod error;
pub mod errormodel;
pub mod estimation;
pub mod gf2;
pub mod localize;
pub mod pauli;

#[cfg(test)]
pub(crate) mod testutil;

pub use bounds::{BoundReport, Span, SpanKind};
pub use densesim::{
    cluster_state, wc_state, Ensemble, MeasurementSpec, PureState, QubitAction, TwoQubitState,
};
pub use error::{Error, Result};
pub use pauli::{GeneratorSet, MeasBasis, Pauli, PauliString, StabilizerElement};
