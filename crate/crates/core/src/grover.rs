//! Grover iteration driver and the exact two-level recursion that describes it.
//!
//! Starting from the uniform superposition every unmarked amplitude stays equal
//! to every other unmarked amplitude (call it `a`) and likewise for the marked
//! ones (`b`). One iteration is then the map
//!
//! ```text
//! b ← −b                       (oracle)
//! μ = ((N − M)·a + M·b) / N
//! a ← 2μ − a,  b ← 2μ − b      (inversion about the average)
//! ```
//!
//! [`closed_form_trace`] runs that recursion; [`brute_force_check`] runs the full
//! state vector and reports how far the two disagree.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevec::{apply_diffusion, apply_oracle, MarkedSet, StateVector, MAX_QUBITS};

/// Search space of `N = 2^n` items with `M` marked ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SearchSpec {
    size: u64,
    marked: u64,
}

impl SearchSpec {
    pub fn new(size: u64, marked: u64) -> Result<Self> {
        if size < 2 || !size.is_power_of_two() {
            return Err(Error::config(format!("search size {size} is not 2^n with n >= 1")));
        }
        if marked == 0 || marked > size {
            return Err(Error::config(format!("marked count {marked} outside 1..={size}")));
        }
        Ok(Self { size, marked })
    }

    pub fn for_qubits(qubits: usize, marked: u64) -> Result<Self> {
        if qubits == 0 || qubits > 62 {
            return Err(Error::config(format!("qubit count {qubits} out of range")));
        }
        Self::new(1u64 << qubits, marked)
    }

    /// `N`
    pub fn size(&self) -> u64 {
        self.size
    }

    /// `M`
    pub fn marked(&self) -> u64 {
        self.marked
    }

    pub fn qubits(&self) -> usize {
        self.size.trailing_zeros() as usize
    }

    /// `M / N`
    pub fn fraction(&self) -> f64 {
        self.marked as f64 / self.size as f64
    }
}

/// Unmarked and marked amplitudes after one iteration from the uniform state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneShotAmplitudes {
    pub unmarked: f64,
    pub marked: f64,
}

/// `((N − 4M)/(N√N), (3N − 4M)/(N√N))`.
pub fn one_shot_amplitudes(spec: SearchSpec) -> OneShotAmplitudes {
    let n = spec.size as f64;
    let m = spec.marked as f64;
    let denom = n * n.sqrt();
    OneShotAmplitudes { unmarked: (n - 4.0 * m) / denom, marked: (3.0 * n - 4.0 * m) / denom }
}

/// One-iteration success as a polynomial in the marked fraction `x = M/N`:
/// `9x − 24x² + 16x³ = x(3 − 4x)²`.
pub fn success_at_fraction(x: f64) -> f64 {
    9.0 * x - 24.0 * x * x + 16.0 * x * x * x
}

pub fn success_one_iteration(spec: SearchSpec) -> f64 {
    let p = success_at_fraction(spec.fraction());
    assert!((-1e-12..=1.0 + 1e-12).contains(&p), "success probability {p} left [0, 1] for {spec:?}");
    p
}

/// `(N − M)·((N − 4M)/(N√N))²`
pub fn failure_one_iteration(spec: SearchSpec) -> f64 {
    let a = one_shot_amplitudes(spec).unmarked;
    (spec.size - spec.marked) as f64 * a * a
}

/// `(M/N, success_one_iteration)` for each spec, in input order.
pub fn success_curve(samples: &[SearchSpec]) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return Err(Error::config("success curve needs at least one sample"));
    }
    Ok(samples.iter().map(|&s| (s.fraction(), success_one_iteration(s))).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub unmarked: f64,
    pub marked: f64,
    pub success: f64,
}

/// Amplitudes and success probability after 0, 1, …, k iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub spec: SearchSpec,
    pub records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn last(&self) -> &IterationRecord {
        self.records.last().expect("trace always holds iteration 0")
    }

    /// Largest `|M·b² + (N−M)·a² − 1|` over the trace.
    pub fn normalization_error(&self) -> f64 {
        let m = self.spec.marked as f64;
        let rest = (self.spec.size - self.spec.marked) as f64;
        self.records
            .iter()
            .map(|r| (m * r.marked * r.marked + rest * r.unmarked * r.unmarked - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

pub fn closed_form_trace(spec: SearchSpec, iterations: usize) -> IterationTrace {
    let n = spec.size as f64;
    let m = spec.marked as f64;
    let mut a = 1.0 / n.sqrt();
    let mut b = a;
    let record = |k, a: f64, b: f64| IterationRecord { iteration: k, unmarked: a, marked: b, success: m * b * b };
    let mut records = Vec::with_capacity(iterations + 1);
    records.push(record(0, a, b));
    for k in 1..=iterations {
        let flipped = -b;
        let mean = ((n - m) * a + m * flipped) / n;
        a = 2.0 * mean - a;
        b = 2.0 * mean - flipped;
        records.push(record(k, a, b));
    }
    IterationTrace { spec, records }
}

/// Oracle on `marked`, then reflection about `about`.
pub fn grover_iterate(s: &StateVector, marked: &MarkedSet, about: &StateVector) -> Result<StateVector> {
    apply_diffusion(&apply_oracle(s, marked)?, about)
}

/// Runs `iterations` full Grover iterations from the uniform state with the given
/// marked placement and returns the largest amplitude gap to the closed form.
pub fn brute_force_check(spec: SearchSpec, iterations: usize, marked: &MarkedSet) -> Result<f64> {
    let qubits = spec.qubits();
    if qubits > MAX_QUBITS {
        return Err(Error::config(format!("{qubits} qubits exceeds the simulation limit")));
    }
    if marked.len() as u64 != spec.marked() {
        return Err(Error::config(format!("marked set has {} entries, spec says {}", marked.len(), spec.marked())));
    }
    marked.check_range(qubits)?;
    let uniform = StateVector::uniform(qubits)?;
    let trace = closed_form_trace(spec, iterations);
    let mut state = uniform.clone();
    let mut worst = deviation(&state, marked, &trace.records[0]);
    for record in &trace.records[1..] {
        state = grover_iterate(&state, marked, &uniform)?;
        worst = worst.max(deviation(&state, marked, record));
    }
    Ok(worst)
}

fn deviation(state: &StateVector, marked: &MarkedSet, record: &IterationRecord) -> f64 {
    state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, amp)| {
            let expected = if marked.contains(i) { record.marked } else { record.unmarked };
            (amp - expected).norm()
        })
        .fold(0.0, f64::max)
}

/// Success probability after `iterations` rounds for a single marked state,
/// from both the closed form and a full simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub qubits: usize,
    pub iteration: usize,
    pub success: f64,
    pub simulated: f64,
}

/// Success probabilities per qubit count and iteration 1..=max, single marked
/// state (placed at the all-ones index for the simulation).
pub fn iteration_table(qubit_counts: &[usize], max_iterations: usize) -> Result<Vec<TableEntry>> {
    let mut out = Vec::new();
    for &n in qubit_counts {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::config(format!("qubit count {n} outside 1..={MAX_QUBITS}")));
        }
        let spec = SearchSpec::for_qubits(n, 1)?;
        let trace = closed_form_trace(spec, max_iterations);
        let target = (1usize << n) - 1;
        let marked = MarkedSet::new(vec![target])?;
        let uniform = StateVector::uniform(n)?;
        let mut state = uniform.clone();
        for record in &trace.records[1..] {
            state = grover_iterate(&state, &marked, &uniform)?;
            out.push(TableEntry {
                qubits: n,
                iteration: record.iteration,
                success: record.success,
                simulated: state.amplitude(target).norm_sqr(),
            });
        }
    }
    Ok(out)
}

/// Reference single-marked-state success percentages with the decimal places
/// they are usually quoted to: `(qubits, iteration, percent, decimals)`.
pub const REFERENCE_SUCCESS_PERCENT: [(usize, usize, f64, usize); 10] = [
    (2, 1, 100.0, 0),
    (3, 1, 78.0, 0),
    (3, 2, 94.5, 1),
    (4, 1, 47.0, 0),
    (4, 2, 90.0, 0),
    (4, 3, 96.1, 1),
    (5, 1, 25.0, 0),
    (5, 2, 60.0, 0),
    (5, 3, 89.0, 0),
    (5, 4, 99.9, 1),
];

/// Percentage cut (not rounded) to `decimals` places; this is how the reference
/// table's mixed-precision entries relate to the exact values.
pub fn truncate_percent(probability: f64, decimals: usize) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    // nudge so that exact values like 78.125 -> 78.1 survive binary rounding
    ((probability * 100.0 * scale) + 1e-9).floor() / scale
}
