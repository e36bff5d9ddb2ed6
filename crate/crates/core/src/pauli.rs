//! Exact stabilizer algebra for linear cluster states: multi-qubit Pauli
//! operators in symplectic bit form, the cluster generator set, products of
//! generator subsets, and the three stabilizers that survive a single-qubit
//! measurement sequence.
//!
//! Qubits are indexed 0-based by chain position. The textual encoding is
//! `±[IXYZ]{n}` (leftmost letter = qubit 0), with `+i`/`-i` prefixes for the
//! non-Hermitian phases.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Z => (false, true),
            Pauli::Y => (true, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (false, true) => Pauli::Z,
            (true, true) => Pauli::Y,
        }
    }

    fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn from_char(c: char) -> Result<Self> {
        match c {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::Parse(format!("invalid Pauli letter '{other}'"))),
        }
    }
}

/// An n-qubit Pauli operator with exact phase.
///
/// The letter on each qubit is stored as an (x, z) bit pair (`x=1,z=1`
/// denotes Y, `x=0,z=0` identity) and the overall phase as an exponent of i,
/// so products are computed exactly without materializing matrices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    x: Vec<bool>,
    z: Vec<bool>,
    /// Phase is i^phase_exp, phase_exp in 0..4.
    phase_exp: u8,
}

impl PauliString {
    /// The identity on `n` qubits with phase +1.
    pub fn identity(n: usize) -> Self {
        PauliString {
            x: vec![false; n],
            z: vec![false; n],
            phase_exp: 0,
        }
    }

    /// Build from a sequence of letters with phase +1.
    pub fn from_letters(letters: &[Pauli]) -> Self {
        let mut p = PauliString::identity(letters.len());
        for (q, &l) in letters.iter().enumerate() {
            let (x, z) = l.bits();
            p.x[q] = x;
            p.z[q] = z;
        }
        p
    }

    /// A single non-identity letter at qubit `q` on an otherwise trivial
    /// string.
    pub fn single(n: usize, q: usize, letter: Pauli) -> Result<Self> {
        if q >= n {
            return Err(Error::Domain(format!("qubit {q} out of range for n={n}")));
        }
        let mut letters = vec![Pauli::I; n];
        letters[q] = letter;
        Ok(PauliString::from_letters(&letters))
    }

    pub fn n_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn letter(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x[q], self.z[q])
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (0..self.n_qubits()).map(|q| self.letter(q)).collect()
    }

    /// Number of qubits with a non-identity letter.
    pub fn weight(&self) -> usize {
        (0..self.n_qubits())
            .filter(|&q| self.letter(q) != Pauli::I)
            .count()
    }

    pub fn phase_exp(&self) -> u8 {
        self.phase_exp
    }

    pub fn phase(&self) -> Complex64 {
        match self.phase_exp {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Hermitian operators carry phase ±1.
    pub fn is_hermitian(&self) -> bool {
        self.phase_exp.is_multiple_of(2)
    }

    /// Same operator with the phase negated.
    pub fn negated(&self) -> Self {
        let mut p = self.clone();
        p.phase_exp = (p.phase_exp + 2) % 4;
        p
    }

    pub fn x_bits(&self) -> &[bool] {
        &self.x
    }

    pub fn z_bits(&self) -> &[bool] {
        &self.z
    }

    /// Exact product self · rhs.
    ///
    /// Phase bookkeeping follows the exponent-of-i convention: per qubit the
    /// letters multiply as X·Z = -iY, Z·X = iY, etc., and the exponents
    /// accumulate mod 4. Multiplying an operator by itself yields the
    /// identity with phase +1.
    pub fn multiply(&self, rhs: &PauliString) -> Result<PauliString> {
        let n = self.check_same_size(rhs)?;
        let mut phase = u32::from(self.phase_exp) + u32::from(rhs.phase_exp);
        let mut x = vec![false; n];
        let mut z = vec![false; n];
        for q in 0..n {
            let (x1, z1) = (u32::from(self.x[q]), u32::from(self.z[q]));
            let (x2, z2) = (u32::from(rhs.x[q]), u32::from(rhs.z[q]));
            let xr = x1 ^ x2;
            let zr = z1 ^ z2;
            // i^(x1 z1) X^x1 Z^z1 · i^(x2 z2) X^x2 Z^z2 reordered to the
            // canonical letter i^(xr zr) X^xr Z^zr picks up this exponent:
            phase += x1 * z1 + x2 * z2 + 2 * z1 * x2 + 4 - xr * zr;
            x[q] = xr == 1;
            z[q] = zr == 1;
        }
        Ok(PauliString {
            x,
            z,
            phase_exp: (phase % 4) as u8,
        })
    }

    /// True iff the symplectic inner product of the (x, z) bit vectors
    /// vanishes mod 2.
    pub fn commutes_with(&self, rhs: &PauliString) -> Result<bool> {
        let n = self.check_same_size(rhs)?;
        let mut acc = false;
        for q in 0..n {
            acc ^= (self.x[q] & rhs.z[q]) ^ (self.z[q] & rhs.x[q]);
        }
        Ok(!acc)
    }

    fn check_same_size(&self, rhs: &PauliString) -> Result<usize> {
        if self.n_qubits() != rhs.n_qubits() {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {} qubits",
                self.n_qubits(),
                rhs.n_qubits()
            )));
        }
        Ok(self.n_qubits())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase_exp {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}")?;
        for q in 0..self.n_qubits() {
            write!(f, "{}", self.letter(q).to_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (phase_exp, rest) = if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else {
            return Err(Error::Parse(format!("missing sign prefix in '{s}'")));
        };
        if rest.is_empty() {
            return Err(Error::Parse("empty Pauli body".into()));
        }
        let letters = rest
            .chars()
            .map(Pauli::from_char)
            .collect::<Result<Vec<_>>>()?;
        let mut p = PauliString::from_letters(&letters);
        p.phase_exp = phase_exp;
        Ok(p)
    }
}

/// The ordered generators of an n-qubit linear cluster state.
///
/// Generator 0 is X Z I…, generator i (interior) is …Z X Z…, generator n-1
/// is …I Z X. All pairs commute and no nonempty subset multiplies to the
/// identity.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    generators: Vec<PauliString>,
}

impl GeneratorSet {
    /// Generators for a chain of `n >= 2` qubits.
    pub fn cluster(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!(
                "cluster needs n >= 2 qubits, got {n}"
            )));
        }
        let mut generators = Vec::with_capacity(n);
        for i in 0..n {
            let mut letters = vec![Pauli::I; n];
            letters[i] = Pauli::X;
            if i > 0 {
                letters[i - 1] = Pauli::Z;
            }
            if i + 1 < n {
                letters[i + 1] = Pauli::Z;
            }
            generators.push(PauliString::from_letters(&letters));
        }
        Ok(GeneratorSet { generators })
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn get(&self, i: usize) -> &PauliString {
        &self.generators[i]
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    /// Ordered product of the indexed generators.
    ///
    /// The index set is canonical (sorted, deduplicated); the resulting
    /// element is Hermitian with phase ±1 since the generators commute.
    pub fn compose(&self, indices: &BTreeSet<usize>) -> Result<StabilizerElement> {
        let n = self.len();
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::Domain(format!(
                "generator index {bad} out of range for n={n}"
            )));
        }
        let mut operator = PauliString::identity(n);
        for &i in indices {
            operator = operator.multiply(&self.generators[i])?;
        }
        debug_assert!(operator.is_hermitian());
        Ok(StabilizerElement {
            operator,
            generator_indices: indices.clone(),
        })
    }
}

/// A stabilizer-group element together with the generator subset that
/// produces it. Generator independence makes the index set unique, so
/// `m = |indices|` is well defined.
#[derive(Debug, Clone)]
pub struct StabilizerElement {
    pub operator: PauliString,
    pub generator_indices: BTreeSet<usize>,
}

impl StabilizerElement {
    /// Number of generators in the product.
    pub fn m(&self) -> usize {
        self.generator_indices.len()
    }
}

/// Measurement basis label for the interior qubits of a chain segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasBasis {
    X,
    Y,
}

/// The three nontrivial stabilizer-group elements that act as identity or as
/// the measured Pauli on every measured qubit 1..n-2 and nontrivially on both
/// chain ends.
///
/// Solved as a GF(2) kernel problem on generator exponent vectors: a product
/// with exponents a has letter bits x_j = a_j, z_j = a_{j-1} ^ a_{j+1} on
/// qubit j, so an X (Y) measurement on j imposes one linear constraint. The
/// kernel has dimension exactly two for a chain, giving three nonzero
/// solutions without enumerating the 2^n group. Output is sorted by m, then
/// by the textual operator encoding.
pub fn surviving_triplet(n: usize, bases: &[MeasBasis]) -> Result<[StabilizerElement; 3]> {
    if n < 3 {
        return Err(Error::Domain(format!(
            "surviving_triplet needs n >= 3, got {n}"
        )));
    }
    if bases.len() != n - 2 {
        return Err(Error::Domain(format!(
            "expected {} basis labels for n={n}, got {}",
            n - 2,
            bases.len()
        )));
    }
    let mut constraints = BitMatrix::zeros(n - 2, n);
    for (row, &basis) in bases.iter().enumerate() {
        let j = row + 1; // measured qubit
        constraints.set(row, j - 1, true);
        constraints.set(row, j + 1, true);
        if basis == MeasBasis::Y {
            constraints.set(row, j, true);
        }
    }
    let kernel = constraints.nullspace();
    if kernel.len() != 2 {
        return Err(Error::Domain(format!(
            "measurement constraints have kernel dimension {} (expected 2)",
            kernel.len()
        )));
    }
    let v3: Vec<bool> = kernel[0]
        .iter()
        .zip(&kernel[1])
        .map(|(a, b)| a ^ b)
        .collect();
    let gens = GeneratorSet::cluster(n)?;
    let mut elements = Vec::with_capacity(3);
    for v in [&kernel[0], &kernel[1], &v3] {
        let indices: BTreeSet<usize> = v
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect();
        let element = gens.compose(&indices)?;
        if element.operator.letter(0) == Pauli::I || element.operator.letter(n - 1) == Pauli::I {
            return Err(Error::Domain(
                "surviving element acts trivially on a target qubit".into(),
            ));
        }
        elements.push(element);
    }
    elements.sort_by_key(|e| (e.m(), e.operator.to_string()));
    let mut it = elements.into_iter();
    Ok([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])
}

/// Sum of the three surviving m values: 4 + 2(n-2), independent of the X/Y
/// sequence.
pub fn triplet_m_sum(n: usize) -> Result<usize> {
    if n < 3 {
        return Err(Error::Domain(format!(
            "triplet_m_sum needs n >= 3, got {n}"
        )));
    }
    Ok(4 + 2 * (n - 2))
}

/// Floor on the expectation of a product of `m` generators when every
/// generator expectation is at least `z`: m(z-1) + 1. Raw value; may fall
/// below -1 for large m (see [`backbone_floor_clamped`]).
pub fn backbone_floor(m: usize, z: f64) -> f64 {
    m as f64 * (z - 1.0) + 1.0
}

/// [`backbone_floor`] clamped at -1 for reporting.
pub fn backbone_floor_clamped(m: usize, z: f64) -> f64 {
    backbone_floor(m, z).max(-1.0)
}

/// Joint floor on the expectation of a product of two commuting Pauli
/// observables with individual expectations `a` and `b`: a + b - 1.
pub fn pairwise_floor(a: f64, b: f64) -> f64 {
    a + b - 1.0
}
