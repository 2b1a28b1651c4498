//! Dense state vectors over `2^n` computational basis states.
//!
//! Basis indices follow ket reading order: qubit 0 is the most significant bit,
//! so `|0100⟩` is index 4.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Amplitude = Complex64;

/// Largest register the dense representation accepts (16 Mi amplitudes at 24 qubits
/// would not be desk scale; 20 keeps it at 1 Mi).
pub const MAX_QUBITS: usize = 20;

/// Tolerance for norm and identity checks.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// One of the four single-qubit states a product preparation draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Letter {
    /// (|0⟩ + |1⟩)/√2
    Plus,
    /// (|0⟩ − |1⟩)/√2
    Minus,
    /// (|0⟩ + i|1⟩)/√2
    PlusI,
    /// (|0⟩ − i|1⟩)/√2
    MinusI,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::Plus, Letter::Minus, Letter::PlusI, Letter::MinusI];

    /// Amplitudes on |0⟩ and |1⟩.
    pub fn amplitudes(self) -> [Amplitude; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let one = Complex64::new(h, 0.0);
        match self {
            Letter::Plus => [one, Complex64::new(h, 0.0)],
            Letter::Minus => [one, Complex64::new(-h, 0.0)],
            Letter::PlusI => [one, Complex64::new(0.0, h)],
            Letter::MinusI => [one, Complex64::new(0.0, -h)],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Letter::Plus => "plus",
            Letter::Minus => "minus",
            Letter::PlusI => "plus_i",
            Letter::MinusI => "minus_i",
        }
    }

    /// Short ket label: `+`, `-`, `+i`, `-i`.
    pub fn symbol(self) -> &'static str {
        match self {
            Letter::Plus => "+",
            Letter::Minus => "-",
            Letter::PlusI => "+i",
            Letter::MinusI => "-i",
        }
    }

    /// Accepts the long names (`plus_i`, also `plus-i`) and the ket symbols.
    pub fn parse(s: &str) -> Result<Letter> {
        match s.trim() {
            "plus" | "+" => Ok(Letter::Plus),
            "minus" | "-" => Ok(Letter::Minus),
            "plus_i" | "plus-i" | "+i" => Ok(Letter::PlusI),
            "minus_i" | "minus-i" | "-i" => Ok(Letter::MinusI),
            other => Err(Error::config(format!(
                "unknown single-qubit state {other:?}; expected plus, minus, plus_i or minus_i"
            ))),
        }
    }
}

/// A separable n-qubit preparation, one [`Letter`] per qubit (qubit 0 first).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Letter>", into = "Vec<Letter>")]
pub struct ProductState {
    letters: Vec<Letter>,
}

impl ProductState {
    pub fn new(letters: Vec<Letter>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::config("product state needs at least one qubit"));
        }
        if letters.len() > MAX_QUBITS {
            return Err(Error::config(format!("{} qubits exceeds the {MAX_QUBITS}-qubit limit", letters.len())));
        }
        Ok(Self { letters })
    }

    /// `|+⟩^⊗n`, the uniform superposition.
    pub fn uniform_plus(qubits: usize) -> Result<Self> {
        Self::new(vec![Letter::Plus; qubits])
    }

    /// The `index`-th word of the `4^n` enumeration, read as base-4 digits with
    /// qubit 0 most significant and digits ordered as [`Letter::ALL`].
    pub fn from_index(qubits: usize, mut index: u64) -> Result<Self> {
        let mut letters = vec![Letter::Plus; qubits];
        for slot in letters.iter_mut().rev() {
            *slot = Letter::ALL[(index % 4) as usize];
            index /= 4;
        }
        if index != 0 {
            return Err(Error::config("product-state index out of range"));
        }
        Self::new(letters)
    }

    /// Every product state on `qubits` qubits, in [`ProductState::from_index`] order.
    pub fn enumerate(qubits: usize) -> impl Iterator<Item = ProductState> {
        let count = 4u64.pow(qubits as u32);
        (0..count).map(move |i| ProductState::from_index(qubits, i).expect("index in range"))
    }

    pub fn parse_list<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let letters = names.iter().map(|s| Letter::parse(s.as_ref())).collect::<Result<Vec<_>>>()?;
        Self::new(letters)
    }

    pub fn qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn expand(&self) -> StateVector {
        expand_product(self)
    }
}

impl TryFrom<Vec<Letter>> for ProductState {
    type Error = Error;

    fn try_from(letters: Vec<Letter>) -> Result<Self> {
        Self::new(letters)
    }
}

impl From<ProductState> for Vec<Letter> {
    fn from(p: ProductState) -> Self {
        p.letters
    }
}

impl fmt::Display for ProductState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "|{}>", l.symbol())?;
        }
        Ok(())
    }
}

/// Strictly increasing, non-empty set of basis indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct MarkedSet {
    indices: Vec<usize>,
}

impl MarkedSet {
    /// Sorts the input; duplicates and the empty set are rejected.
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::config("marked set must not be empty"));
        }
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::config(format!("duplicate marked index {}", w[0])));
        }
        Ok(Self { indices })
    }

    /// Like [`MarkedSet::new`] but also checks every index fits in `qubits`.
    pub fn for_qubits(qubits: usize, indices: Vec<usize>) -> Result<Self> {
        let set = Self::new(indices)?;
        set.check_range(qubits)?;
        Ok(set)
    }

    /// Parses entries that are either bit strings of length `qubits` (most
    /// significant first) or decimal indices.
    pub fn parse_entries<S: AsRef<str>>(qubits: usize, entries: &[S]) -> Result<Self> {
        let indices = entries.iter().map(|e| parse_basis_label(e.as_ref(), qubits)).collect::<Result<Vec<_>>>()?;
        Self::for_qubits(qubits, indices)
    }

    pub fn check_range(&self, qubits: usize) -> Result<()> {
        let dim = 1usize << qubits;
        match self.indices.last() {
            Some(&max) if max >= dim => {
                Err(Error::config(format!("marked index {max} out of range for {qubits} qubits")))
            }
            _ => Ok(()),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    /// Number of indices shared with `other`.
    pub fn overlap(&self, other: &MarkedSet) -> usize {
        self.indices.iter().filter(|&&i| other.contains(i)).count()
    }
}

impl TryFrom<Vec<usize>> for MarkedSet {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<MarkedSet> for Vec<usize> {
    fn from(m: MarkedSet) -> Self {
        m.indices
    }
}

/// A bit string of exactly `qubits` characters is read most-significant first;
/// anything else must be a decimal index.
pub fn parse_basis_label(label: &str, qubits: usize) -> Result<usize> {
    let label = label.trim();
    let is_bits = !label.is_empty() && label.len() == qubits && label.bytes().all(|b| b == b'0' || b == b'1');
    let parsed = if is_bits { usize::from_str_radix(label, 2).ok() } else { label.parse::<usize>().ok() };
    parsed.ok_or_else(|| Error::config(format!("cannot read {label:?} as a basis state")))
}

/// `index` as a ket bit string of width `qubits`.
pub fn basis_label(index: usize, qubits: usize) -> String {
    format!("{index:0qubits$b}")
}

/// Complex amplitudes over the `2^n` basis states of an n-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amps: Vec<Amplitude>,
}

impl StateVector {
    /// Validates length (a power of two, 1..=20 qubits) and unit norm.
    pub fn from_amplitudes(amps: Vec<Amplitude>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::config(format!("state length {len} is not 2^n with n >= 1")));
        }
        let qubits = len.trailing_zeros() as usize;
        check_qubits(qubits)?;
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::config("state has non-finite amplitudes"));
        }
        let state = Self { qubits, amps };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::config(format!("state norm^2 is {norm}, expected 1")));
        }
        Ok(state)
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(amps: Vec<Amplitude>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::config("cannot normalize a zero or non-finite vector"));
        }
        Self::from_amplitudes(amps.into_iter().map(|a| a / norm).collect())
    }

    pub fn basis(qubits: usize, index: usize) -> Result<Self> {
        check_qubits(qubits)?;
        let dim = 1usize << qubits;
        if index >= dim {
            return Err(Error::config(format!("basis index {index} out of range for {qubits} qubits")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { qubits, amps })
    }

    /// Equal real amplitudes `1/√N` on every basis state.
    pub fn uniform(qubits: usize) -> Result<Self> {
        check_qubits(qubits)?;
        let dim = 1usize << qubits;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(Self { qubits, amps: vec![a; dim] })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Amplitude {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `−self`.
    pub fn negated(&self) -> StateVector {
        StateVector { qubits: self.qubits, amps: self.amps.iter().map(|a| -a).collect() }
    }

    pub fn apply_oracle(&self, marked: &MarkedSet) -> Result<StateVector> {
        apply_oracle(self, marked)
    }

    pub fn apply_diffusion(&self, about: &StateVector) -> Result<StateVector> {
        apply_diffusion(self, about)
    }

    pub fn inner_product(&self, other: &StateVector) -> Result<Amplitude> {
        inner_product(self, other)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        measure_distribution(self)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_measurement(self, rng)
    }

    /// Largest per-component modulus of `self − other`; `None` on a dimension mismatch.
    pub fn max_abs_diff(&self, other: &StateVector) -> Option<f64> {
        (self.dim() == other.dim())
            .then(|| self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// Equal up to a unit global factor, component-wise within `tol`.
    pub fn equal_up_to_phase(&self, other: &StateVector, tol: f64) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let overlap = inner_product(other, self).expect("dimensions checked");
        if (overlap.norm() - 1.0).abs() > tol {
            return false;
        }
        let phase = overlap / overlap.norm();
        self.amps.iter().zip(&other.amps).all(|(a, b)| (a - b * phase).norm() <= tol)
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm() < NORM_TOLERANCE {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i)|{}>", a.re, a.im, basis_label(i, self.qubits))?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

fn check_qubits(qubits: usize) -> Result<()> {
    if qubits == 0 || qubits > MAX_QUBITS {
        return Err(Error::config(format!("qubit count {qubits} outside 1..={MAX_QUBITS}")));
    }
    Ok(())
}

fn check_same_dim(a: &StateVector, b: &StateVector) -> Result<()> {
    if a.qubits != b.qubits {
        return Err(Error::config(format!("dimension mismatch: {} vs {} qubits", a.qubits, b.qubits)));
    }
    Ok(())
}

/// Tensor expansion of a product preparation.
pub fn expand_product(p: &ProductState) -> StateVector {
    let mut amps = vec![Complex64::new(1.0, 0.0)];
    for letter in p.letters() {
        let [zero, one] = letter.amplitudes();
        amps = amps.iter().flat_map(|&a| [a * zero, a * one]).collect();
    }
    StateVector { qubits: p.qubits(), amps }
}

/// Phase oracle `I − 2 Σ_{w∈W} |w⟩⟨w|`: negates exactly the marked amplitudes.
pub fn apply_oracle(s: &StateVector, marked: &MarkedSet) -> Result<StateVector> {
    marked.check_range(s.qubits)?;
    let mut amps = s.amps.clone();
    for &i in marked.indices() {
        amps[i] = -amps[i];
    }
    Ok(StateVector { qubits: s.qubits, amps })
}

/// Reflection `2|a⟩⟨a| − I` about `about`.
pub fn apply_diffusion(s: &StateVector, about: &StateVector) -> Result<StateVector> {
    check_same_dim(s, about)?;
    let norm = about.norm_sqr();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::config(format!("reflection axis has norm^2 {norm}, expected 1")));
    }
    let c = 2.0 * inner_product(about, s)?;
    let amps = about.amps.iter().zip(&s.amps).map(|(a, x)| c * a - x).collect();
    Ok(StateVector { qubits: s.qubits, amps })
}

/// `⟨a|b⟩ = Σ conj(a_i) b_i`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Amplitude> {
    check_same_dim(a, b)?;
    Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
}

/// Born-rule probabilities `|amp_i|²`.
pub fn measure_distribution(s: &StateVector) -> Vec<f64> {
    s.amps.iter().map(|a| a.norm_sqr()).collect()
}

/// Inverse-CDF draw over ascending basis indices with one uniform `f64`.
pub fn sample_measurement<R: Rng + ?Sized>(s: &StateVector, rng: &mut R) -> usize {
    sample_from_distribution(&measure_distribution(s), rng)
}

/// Inverse-CDF draw from an explicit probability vector. When rounding leaves
/// the cumulative sum just below the draw, the last index with non-zero mass wins.
pub fn sample_from_distribution<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut cumulative = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}
